#include "evoctl/control_system.hpp"

#include <cmath>
#include <sstream>

namespace evoctl {

void BlockPartition::validate() const {
    if (n0 < 0 || n1 < 0 || nv < 0 || ny < 0 || nu < 0) throw ShapeError("block sizes must be nonnegative");
}

Mat ControlSystem::J() const {
    const int n = part.dim();
    Mat j(n, n + part.nu);
    j << Mat::Identity(n, n), B;
    return j;
}

EvolutionarySystem ControlSystem::evolutionary() const { return {M0, M1, A, J()}; }

Mat ControlSystem::block(const Mat& M, int i, int j) const {
    return M.block(part.block_offset(i), part.block_offset(j), part.block_size(i), part.block_size(j));
}

namespace {

void check_common(const BlockPartition& part, const Mat& M0, const Mat& M1, const Mat& B) {
    part.validate();
    const int n = part.dim();
    require_shape(M0.rows() == n && M0.cols() == n, "M0 must match the partition");
    require_shape(M1.rows() == n && M1.cols() == n, "M1 must match the partition");
    require_shape(B.rows() == n && B.cols() == part.nu, "B must be state x controls");
    if (max_abs(M0 - M0.adjoint()) > 1e-12 * std::max(1.0, max_abs(M0)))
        throw HypothesisViolation("M0 is not selfadjoint");
}

ControlSystem finish(const BlockPartition& part, const Mat& M0, const Mat& M1, const Mat& F, const Mat& Fs,
                     const Mat& B) {
    ControlSystem s;
    s.part = part;
    s.M0 = M0;
    s.M1 = M1;
    s.B = B;
    s.F = F;
    s.F_star = Fs;
    s.C = F.bottomRows(part.nv);
    s.C_dual = Fs.rightCols(part.nv);
    const int n = part.dim();
    s.A = Mat::Zero(n, n);
    s.A.block(0, part.off1(), part.n0, part.h1()) = -Fs;
    s.A.block(part.off1(), 0, part.h1(), part.n0) = F;
    return s;
}

}  // namespace

ControlSystem assemble_control_from_F(const BlockPartition& part, const Mat& M0, const Mat& M1, const Mat& F,
                                      const Mat& F_star, const Mat& B) {
    check_common(part, M0, M1, B);
    require_shape(F.rows() == part.h1() && F.cols() == part.n0, "F must map H0 to H1");
    require_shape(F_star.rows() == part.n0 && F_star.cols() == part.h1(), "F* must map H1 to H0");
    return finish(part, M0, M1, F, F_star, B);
}

ControlSystem assemble_control(const BlockPartition& part, const Mat& M0, const Mat& M1, const GradDivPair& pair,
                               const Mat& C_nodal, const Mat& gram_V, const Mat& B) {
    check_common(part, M0, M1, B);
    require_shape(part.n0 == pair.n_nodes() && part.n1 == pair.n_cells(), "partition must match the pair");
    require_shape(C_nodal.rows() == part.nv && C_nodal.cols() == pair.n_nodes(), "C must map nodes to V");
    require_shape(gram_V.rows() == part.nv && gram_V.cols() == part.nv, "gram_V must be square on V");

    BoundaryCoupling bc;
    bc.pair = pair;
    bc.bdG = compute_bd_space(pair, BdSide::G);
    bc.bdD = compute_bd_space(pair, BdSide::D);
    bc.gram_V = gram_V;
    // C must factor through the boundary data of its argument.
    bc.K = C_nodal * bc.bdG.basis;
    const Mat C_eff = bc.K * bc.bdG.projector;
    if (max_abs(C_nodal - C_eff) > 1e-8 * std::max(1.0, max_abs(C_nodal)))
        throw SpecError("C does not vanish on zero-boundary node vectors");
    bc.K_sharp = bc.K.adjoint() * gram_V;
    Eigen::LLT<Mat> llt(herm_part(gram_V));
    if (llt.info() != Eigen::Success) throw SpecError("gram_V is not positive definite");
    bc.L = llt.matrixL();

    const Mat Cdual = dual_projection(bc.bdG, bc.bdD, pair) * bc.K_sharp;
    const Mat Dmin = minimal_div_extended(pair);

    // Physical-coordinate blocks, then the orthonormal change of variables.
    const RVec s0 = pair.w0.cwiseSqrt(), s1 = pair.w1.cwiseSqrt();
    const Mat Lh = bc.L.adjoint();
    const Mat Lh_inv = Lh.triangularView<Eigen::Upper>().solve(Mat::Identity(part.nv, part.nv));
    Mat F(part.h1(), part.n0), Fs(part.n0, part.h1());
    F.topRows(part.n1) = diag_c(s1) * (-pair.G) * diag_c(s0.cwiseInverse());
    F.bottomRows(part.nv) = Lh * C_eff * diag_c(s0.cwiseInverse());
    Fs.leftCols(part.n1) = diag_c(s0) * Dmin * diag_c(s1.cwiseInverse());
    Fs.rightCols(part.nv) = diag_c(s0) * Cdual * Lh_inv;

    auto s = finish(part, M0, M1, F, Fs, B);
    s.coupling = std::move(bc);
    return s;
}

double adjoint_defect(const ControlSystem& sys, int draws, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    auto rv = [&](int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
        return v;
    };
    double worst = 0.0;
    for (int k = 0; k < draws; ++k) {
        const Vec x = rv(sys.part.n0), z = rv(sys.part.h1());
        const double d = std::abs((sys.F * x).dot(z) - x.dot(sys.F_star * z));
        worst = std::max(worst, d / (x.norm() * z.norm()));
    }
    return worst;
}

namespace {

double operator_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace

CompatibilityDefects check_compatibility(const Mat& M1_22, const Mat& M1_20, const Mat& M1_21, const Mat& B0,
                                         const Mat& B1, const Mat& B2) {
    require_shape(M1_22.rows() == M1_22.cols(), "M1_22 square");
    Eigen::FullPivLU<Mat> lu(M1_22);
    if (M1_22.size() > 0 && !lu.isInvertible())
        throw HypothesisViolation("M1_22 is not invertible; compatibility conditions undefined");
    CompatibilityDefects d;
    const Mat S0 = lu.solve(M1_20), S1 = lu.solve(M1_21);
    d.d0 = operator_norm(S0.adjoint() * B2 - B0);
    d.d1 = operator_norm(S1.adjoint() * B2 - B1);
    return d;
}

CompatibilityDefects check_compatibility(const ControlSystem& sys) {
    const auto& p = sys.part;
    return check_compatibility(sys.block(sys.M1, 2, 2), sys.block(sys.M1, 2, 0), sys.block(sys.M1, 2, 1),
                               sys.B.middleRows(0, p.n0), sys.B.middleRows(p.off1(), p.h1()),
                               sys.B.middleRows(p.off_y(), p.ny));
}

Sampler control_source(const ControlSystem& sys, const Sampler& u) {
    const int n = sys.part.dim(), m = sys.part.nu;
    return [u, n, m](double t) {
        Vec f = Vec::Zero(n + m);
        const Vec ut = u(t);
        require_shape(ut.size() == m, "control sample size");
        f.tail(m) = ut;
        return f;
    };
}

Trajectory simulate(const ControlSystem& sys, const Vec& x0, const Sampler& u, const TimeGrid& grid, Scheme scheme) {
    return solve(sys.evolutionary(), x0, control_source(sys, u), grid, scheme);
}

std::vector<Vec> control_samples(const ControlSystem& sys, const Trajectory& traj) {
    std::vector<Vec> out;
    out.reserve(traj.inputs.size());
    for (const auto& f : traj.inputs) out.push_back(f.tail(sys.part.nu));
    return out;
}

namespace {

int grid_index(const TimeGrid& g, double t) {
    const double r = t / g.tau();
    const int k = static_cast<int>(std::lround(r));
    if (std::abs(r - k) > 1e-9 || k < 0 || k > g.n_steps)
        throw std::invalid_argument("ledger endpoint is not a grid point");
    return k;
}

}  // namespace

EnergyLedger energy_ledger(const ControlSystem& sys, const Trajectory& traj, const std::vector<Vec>& u_samples,
                           double a, double b) {
    const auto& p = sys.part;
    std::ostringstream why;
    const double y_rows = max_abs(sys.M0.middleRows(p.off_y(), p.ny));
    if (y_rows > 1e-12) why << "M0 rows of the Y block are not zero (max " << y_rows << "); ";
    std::optional<CompatibilityDefects> cd;
    try {
        cd = check_compatibility(sys);
    } catch (const HypothesisViolation& e) {
        why << e.what() << "; ";
    }
    if (cd && (cd->d0 > 1e-10 || cd->d1 > 1e-10))
        why << "compatibility conditions fail (defects " << cd->d0 << ", " << cd->d1 << "); ";
    if (!why.str().empty()) throw HypothesisViolation("energy ledger refused: " + why.str());
    if (!(a < b)) throw std::invalid_argument("ledger needs a < b");
    require_shape(static_cast<int>(u_samples.size()) == traj.n_steps(), "one control sample per step");

    const int ia = grid_index(traj.grid, a), ib = grid_index(traj.grid, b);
    const double tau = traj.grid.tau();
    const Mat ReM1 = herm_part(sys.M1);
    const Mat M22inv = Eigen::FullPivLU<Mat>(sys.block(sys.M1, 2, 2)).inverse();
    const Mat ReM22inv = herm_part(M22inv);
    const Mat B2 = sys.B.middleRows(p.off_y(), p.ny);

    auto stored = [&](const Vec& x) { return 0.5 * std::real(x.dot(sys.M0 * x)); };
    EnergyLedger L;
    L.a = traj.grid.t(ia);
    L.b = traj.grid.t(ib);
    L.stored_drop = stored(traj.states[ia]) - stored(traj.states[ib]);
    for (int k = ia; k < ib; ++k) {
        const Vec x = traj.eval_state(k);
        L.dissipation += tau * std::real(x.dot(ReM1 * x));
        const Vec bu = B2 * u_samples[k];
        L.supply += tau * std::real(bu.dot(ReM22inv * bu));
        if (traj.step_scheme[k] == Scheme::backward_euler) {
            const Vec dx = traj.states[k + 1] - traj.states[k];
            L.artificial_dissipation += 0.5 * std::real(dx.dot(sys.M0 * dx));
        }
    }
    L.defect = L.stored_drop - (L.dissipation - L.supply);
    return L;
}

double boundary_equation_defect(const ControlSystem& sys, const Vec& x) {
    if (!sys.coupling) throw std::invalid_argument("system has no grad/div boundary coupling");
    const auto& bc = *sys.coupling;
    const auto& p = sys.part;
    const GradDivPair& pair = bc.pair;
    const Vec zeta = diag_c(pair.w1.cwiseSqrt().cwiseInverse()) * x.segment(p.off1(), p.n1);
    const Mat Lh = bc.L.adjoint();
    const Vec w = Lh.triangularView<Eigen::Upper>().solve(x.segment(p.off_w(), p.nv));

    // C◇w = π*_G K♯w − D̊ π*_D Ġ K♯w. The second term inverts exactly;
    // the first is a least-squares solve over the minimal cells.
    const Vec ks = bc.K_sharp * w;
    const Mat Gdot = dot_map(bc.bdG, bc.bdD, pair);
    Vec zstar = -(bc.bdD.embedding * (Gdot * ks));
    const Vec r1 = bc.bdG.embedding * ks;
    std::vector<int> cols;
    for (int j = 0; j < pair.n_cells(); ++j)
        if (pair.minimal_cells[j]) cols.push_back(j);
    if (!cols.empty()) {
        const Mat Dext = minimal_div_extended(pair);
        Mat Dm(pair.n_nodes(), static_cast<Eigen::Index>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c) Dm.col(c) = Dext.col(cols[c]);
        Eigen::BDCSVD<Mat> svd(Dm, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        const Vec zm = svd.solve(r1);
        for (size_t c = 0; c < cols.size(); ++c) zstar(cols[c]) += zm(c);
    }
    return (bc.bdD.projector * (zeta + zstar)).norm();
}

std::vector<double> boundary_equation_defect(const ControlSystem& sys, const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& x : traj.states) out.push_back(boundary_equation_defect(sys, x));
    return out;
}

IoSamples extract_io(const ControlSystem& sys, const Trajectory& traj) {
    const auto& p = sys.part;
    const int lo = p.off_w(), m = p.nv + p.ny;
    if (max_abs(sys.M0.middleRows(lo, m)) > 1e-12)
        throw HypothesisViolation("w and y rows are not algebraic (M0 rows nonzero)");
    const Mat K = sys.M1 + sys.A;
    const Mat Lblk = K.block(lo, lo, m, m);
    Eigen::FullPivLU<Mat> lu(Lblk);
    if (!lu.isInvertible())
        throw HypothesisViolation("the lower-right block [[M1_22, M1_23], [M1_32, M1_33]] is not invertible");
    const Mat Kx = K.block(lo, 0, m, lo);
    const Mat Bwy = sys.B.middleRows(lo, m);

    IoSamples io;
    for (int k = 0; k < traj.n_steps(); ++k) {
        const Vec x = traj.eval_state(k);
        const Vec u = traj.inputs[k].tail(p.nu);
        const Vec wy = lu.solve(Bwy * u - Kx * x.head(lo));
        io.t.push_back(traj.eval_times[k]);
        io.w.push_back(wy.head(p.nv));
        io.y.push_back(wy.tail(p.ny));
        io.max_deviation = std::max(io.max_deviation, (wy - x.segment(lo, m)).cwiseAbs().maxCoeff());
    }
    return io;
}

}  // namespace evoctl
