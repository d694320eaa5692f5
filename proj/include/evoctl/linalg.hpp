#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace evoctl {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidGridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalRankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A structural hypothesis (selfadjointness, compatibility, ...) does not hold for the given data.
struct HypothesisViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotAnInnerProductError : std::runtime_error {
    NotAnInnerProductError(const std::string& msg, Vec w)
        : std::runtime_error(msg), witness(std::move(w)) {}
    Vec witness;
};

struct StepSingularityError : std::runtime_error {
    StepSingularityError(const std::string& msg, double rc)
        : std::runtime_error(msg), rcond(rc) {}
    double rcond;
};

inline void require_shape(bool ok, const std::string& what) {
    if (!ok) throw ShapeError("shape mismatch: " + what);
}

/// Hermitian part ½(M + Mᴴ).
inline Mat herm_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Weighted inner product ⟨x|y⟩_W = xᴴ diag(w) y.
inline cplx wdot(const Vec& x, const RVec& w, const Vec& y) {
    return (x.conjugate().array() * w.cast<cplx>().array() * y.array()).sum();
}

inline Mat diag_c(const RVec& d) { return d.cast<cplx>().asDiagonal(); }

}  // namespace evoctl
