#include "evoctl/evolution.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

namespace evoctl {

TimeGrid TimeGrid::make(double t_end, int n_steps, double nu) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be positive");
    return TimeGrid{t_end, n_steps, nu};
}

void EvolutionarySystem::validate() const {
    const Eigen::Index n = M0.rows();
    require_shape(M0.cols() == n && M1.rows() == n && M1.cols() == n && A.rows() == n && A.cols() == n,
                  "M0, M1, A must be square of equal size");
    require_shape(J.rows() == n, "J must have as many rows as the state");
    const double s0 = std::max(1.0, max_abs(M0));
    if (max_abs(M0 - M0.adjoint()) > 1e-12 * s0) throw HypothesisViolation("M0 is not selfadjoint");
    const double sa = std::max(1.0, max_abs(A));
    if (max_abs(A + A.adjoint()) > 1e-12 * sa) throw HypothesisViolation("A is not skew-selfadjoint");
}

const char* scheme_name(Scheme s) {
    return s == Scheme::backward_euler ? "backward_euler" : "implicit_midpoint";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "backward_euler") return Scheme::backward_euler;
    if (name == "implicit_midpoint") return Scheme::implicit_midpoint;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

Vec Trajectory::eval_state(int k) const {
    if (step_scheme[k] == Scheme::backward_euler) return states[k + 1];
    return 0.5 * (states[k] + states[k + 1]);
}

double coercivity(const Mat& M0, const Mat& M1, double nu) {
    Eigen::SelfAdjointEigenSolver<Mat> es(nu * herm_part(M0) + herm_part(M1), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

WellPosednessReport check_wellposed(const Mat& M0, const Mat& M1, double nu_max) {
    require_shape(M0.rows() == M0.cols() && M1.rows() == M1.cols() && M0.rows() == M1.rows(),
                  "M0 and M1 must be square of equal size");
    if (!(nu_max > 0.0)) throw std::invalid_argument("nu_max must be positive");
    const double s0 = std::max(1.0, max_abs(M0));
    if (max_abs(M0 - M0.adjoint()) > 1e-12 * s0) throw HypothesisViolation("M0 is not selfadjoint");

    auto c = [&](double nu) { return coercivity(M0, M1, nu); };

    // ν ↦ λ_min(νM₀ + ℜM₁) is concave: coarse log scan, then golden section.
    constexpr int scan = 49;
    std::vector<double> nus(scan), cs(scan);
    int best = 0;
    for (int i = 0; i < scan; ++i) {
        nus[i] = nu_max * std::pow(10.0, -8.0 * (1.0 - double(i) / (scan - 1)));
        cs[i] = c(nus[i]);
        if (cs[i] > cs[best]) best = i;
    }
    double lo = nus[std::max(best - 1, 0)];
    double hi = nus[std::min(best + 1, scan - 1)];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = c(x1), f2 = c(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * hi; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = c(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = c(x1);
        }
    }
    double nu_best = nus[best], c_best = cs[best];
    for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}})
        if (f > c_best) nu_best = x, c_best = f;

    // Smallest ν on the plateau of the maximum.
    const double tol = 1e-13 * std::max(1.0, std::abs(c_best));
    double left = nus[0];
    double nu0 = nu_best;
    if (c(left) >= c_best - tol) {
        nu0 = left;
    } else {
        double a = left, b = nu_best;
        for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
            const double m = 0.5 * (a + b);
            if (c(m) >= c_best - tol) b = m;
            else a = m;
        }
        nu0 = b;
    }

    WellPosednessReport r;
    r.nu0 = nu0;
    r.c = c(nu0);
    r.ok = r.c > 1e-12 * std::max(1.0, max_abs(M0) * nu0 + max_abs(M1));
    if (!r.ok) {
        Eigen::SelfAdjointEigenSolver<Mat> es(nu0 * herm_part(M0) + herm_part(M1));
        r.witness = es.eigenvectors().col(0);
    }
    return r;
}

Trajectory solve_descriptor(const Mat& E, const Mat& K, const Mat& J, const Vec& x0, const Sampler& f,
                            const TimeGrid& grid, Scheme scheme, bool singular_start) {
    const Eigen::Index n = E.rows();
    require_shape(E.cols() == n && K.rows() == n && K.cols() == n && J.rows() == n, "descriptor blocks");
    require_shape(x0.size() == n, "initial state size");
    const double tau = grid.tau();

    auto factor = [&](const Mat& S) {
        Eigen::PartialPivLU<Mat> lu(S);
        const double rc = lu.rcond();
        if (!(rc > 1e-14)) {
            std::ostringstream os;
            os << "step matrix is singular (reciprocal condition estimate " << rc << ")";
            throw StepSingularityError(os.str(), rc);
        }
        return lu;
    };

    Trajectory tr;
    tr.grid = grid;
    tr.scheme = scheme;
    tr.states.reserve(grid.n_steps + 1);
    tr.states.push_back(x0);

    const Mat Et = E / tau;
    std::optional<Eigen::PartialPivLU<Mat>> lu_be, lu_mp;
    Mat rhs_mp;
    for (int k = 0; k < grid.n_steps; ++k) {
        const bool be = scheme == Scheme::backward_euler || (k == 0 && singular_start);
        const Vec& xk = tr.states.back();
        Vec x1;
        if (be) {
            if (!lu_be) lu_be = factor(Et + K);
            const double t = grid.t(k + 1);
            const Vec fk = f(t);
            require_shape(fk.size() == J.cols(), "source sample size");
            x1 = lu_be->solve(Et * xk + J * fk);
            tr.inputs.push_back(fk);
            tr.eval_times.push_back(t);
            tr.step_scheme.push_back(Scheme::backward_euler);
        } else {
            if (!lu_mp) {
                lu_mp = factor(Et + 0.5 * K);
                rhs_mp = Et - 0.5 * K;
            }
            const double t = grid.t(k) + 0.5 * tau;
            const Vec fk = f(t);
            require_shape(fk.size() == J.cols(), "source sample size");
            x1 = lu_mp->solve(rhs_mp * xk + J * fk);
            tr.inputs.push_back(fk);
            tr.eval_times.push_back(t);
            tr.step_scheme.push_back(Scheme::implicit_midpoint);
        }
        tr.states.push_back(std::move(x1));
    }
    return tr;
}

namespace {

bool is_singular_hermitian(const Mat& M0) {
    if (M0.rows() == 0) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(M0), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff() <= 1e-12 * std::max(1.0, max_abs(M0));
}

}  // namespace

Trajectory solve(const EvolutionarySystem& sys, const Vec& x0, const Sampler& f, const TimeGrid& grid,
                 Scheme scheme) {
    sys.validate();
    // A positive value at ν = 1/τ already certifies; only search when it does not.
    if (coercivity(sys.M0, sys.M1, 1.0 / grid.tau()) <= 0.0 && !check_wellposed(sys.M0, sys.M1, 1.0 / grid.tau()).ok)
        std::cerr << "warning: no coercivity certified for nu <= 1/tau; proceeding with implicit steps\n";
    const bool singular = scheme == Scheme::implicit_midpoint && is_singular_hermitian(sys.M0);
    return solve_descriptor(sys.M0, sys.M1 + sys.A, sys.J, x0, f, grid, scheme, singular);
}

double causality_defect(const EvolutionarySystem& sys, const Vec& x0, const Sampler& f1, const Sampler& f2,
                        double a, const TimeGrid& grid, Scheme scheme) {
    const double tau = grid.tau();
    const double eps = 1e-12 * std::max(1.0, grid.t_end);
    for (int k = 0; k <= 2 * grid.n_steps; ++k) {
        const double t = 0.5 * k * tau;
        if (t > a + eps) break;
        if (max_abs(f1(t) - f2(t)) != 0.0) {
            std::ostringstream os;
            os << "inputs differ at t = " << t << " <= a = " << a;
            throw CausalityPreconditionError(os.str(), t);
        }
    }
    const auto t1 = solve(sys, x0, f1, grid, scheme);
    const auto t2 = solve(sys, x0, f2, grid, scheme);
    double d = 0.0;
    for (int k = 0; k <= grid.n_steps && grid.t(k) <= a + eps; ++k)
        d = std::max(d, (t1.states[k] - t2.states[k]).cwiseAbs().maxCoeff());
    return d;
}

double weighted_norm(const Trajectory& traj, const Mat& W) {
    const auto& g = traj.grid;
    const double tau = g.tau();
    double s = 0.0;
    for (int k = 0; k <= g.n_steps; ++k) {
        const Vec& x = traj.states[k];
        const double q = std::real(x.dot(W * x)) * std::exp(-2.0 * g.nu * g.t(k));
        s += (k == 0 || k == g.n_steps) ? 0.5 * q : q;
    }
    return std::sqrt(std::max(0.0, s * tau));
}

Sampler zero_sampler(int dim) {
    return [dim](double) { return Vec::Zero(dim); };
}

}  // namespace evoctl
