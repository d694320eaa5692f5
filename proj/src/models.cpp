#include "evoctl/models.hpp"

#include <cmath>
#include <sstream>

namespace evoctl {

// ================================================================ port-Hamiltonian

namespace {

Mat kron_identity(const Mat& a, int n) {
    Mat out = Mat::Zero(a.rows() * n, a.cols() * n);
    for (int i = 0; i < n; ++i) out.block(i * a.rows(), i * a.cols(), a.rows(), a.cols()) = a;
    return out;
}

Mat kron(const Mat& s, const Mat& a) {
    Mat out = Mat::Zero(s.rows() * a.rows(), s.cols() * a.cols());
    for (int i = 0; i < s.rows(); ++i)
        for (int j = 0; j < s.cols(); ++j)
            if (s(i, j) != cplx(0.0)) out.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = s(i, j) * a;
    return out;
}

void require_square(const Mat& m, int n, const char* name) {
    if (m.rows() != n || m.cols() != n) throw SpecError(std::string(name) + " has the wrong shape");
}

}  // namespace

PortHamiltonianModel build_port_hamiltonian(const PortHamiltonianSpec& spec) {
    const Grid1D grid = Grid1D::make(spec.grid.a, spec.grid.b, spec.grid.n_cells);
    const int ell = static_cast<int>(spec.N.rows());
    if (ell < 1 || spec.N.cols() != ell) throw SpecError("N must be a nonempty square matrix");
    if (!Eigen::FullPivLU<Mat>(spec.N).isInvertible()) throw SpecError("N is not invertible");
    const int nb = 2 * ell;
    require_square(spec.P0, nb, "P0");
    for (const Mat* m : {&spec.M1_22, &spec.M1_23, &spec.M1_32, &spec.M1_33}) require_square(*m, nb, "M1 lower block");
    const int m = static_cast<int>(spec.B1.cols());
    if (spec.B1.rows() != nb || spec.B2.rows() != nb || spec.B2.cols() != m) throw SpecError("B1, B2 shapes");

    const int n = grid.n_cells;
    const double h = grid.h();
    BlockPartition part{n * ell, (n - 1) * ell, nb, nb, m};
    const int dim = part.dim();

    // Material law: M₀ = H⁻¹ pointwise, with x₀ sampled at midpoints and x₁ at nodes.
    Mat M0 = Mat::Zero(dim, dim);
    auto inv_block = [&](double x, int which) {
        const Mat Hx = spec.H(x);
        if (Hx.rows() != nb || Hx.cols() != nb) throw SpecError("H(x) must be 2l x 2l");
        if (max_abs(Hx - Hx.adjoint()) > 1e-12 * std::max(1.0, max_abs(Hx))) throw SpecError("H(x) is not selfadjoint");
        if (max_abs(Hx.block(0, ell, ell, ell)) > 1e-14)
            throw SpecError("H(x) must be block diagonal in (x0, x1) on the staggered grid");
        Eigen::SelfAdjointEigenSolver<Mat> es(Hx);
        if (es.eigenvalues()(0) <= 0.0) throw SpecError("H(x) is not positive definite");
        const Mat blk = Hx.block(which * ell, which * ell, ell, ell);
        return Mat(blk.inverse());
    };
    for (int j = 0; j < n; ++j) M0.block(j * ell, j * ell, ell, ell) = inv_block(grid.midpoint(j), 0);
    for (int i = 1; i < n; ++i) {
        const int o = part.off1() + (i - 1) * ell;
        M0.block(o, o, ell, ell) = inv_block(grid.node(i), 1);
    }

    // M₁: upper part −P₀ (x₀/x₁ coupling through nodal averaging), lower part as given.
    Mat S = Mat::Zero(n, n - 1);
    for (int j = 0; j < n; ++j) {
        if (j >= 1) S(j, j - 1) = 0.5;
        if (j + 1 <= n - 1) S(j, j) = 0.5;
    }
    Mat M1 = Mat::Zero(dim, dim);
    const Mat P00 = spec.P0.block(0, 0, ell, ell), P01 = spec.P0.block(0, ell, ell, ell);
    const Mat P10 = spec.P0.block(ell, 0, ell, ell), P11 = spec.P0.block(ell, ell, ell, ell);
    M1.block(0, 0, part.n0, part.n0) = -kron_identity(P00, n);
    M1.block(part.off1(), part.off1(), part.n1, part.n1) = -kron_identity(P11, n - 1);
    M1.block(0, part.off1(), part.n0, part.n1) = -kron(S, P01);
    M1.block(part.off1(), 0, part.n1, part.n0) = -kron(S.transpose(), P10);
    M1.block(part.off_w(), part.off_w(), nb, nb) = spec.M1_22;
    M1.block(part.off_w(), part.off_y(), nb, nb) = spec.M1_23;
    M1.block(part.off_y(), part.off_w(), nb, nb) = spec.M1_32;
    M1.block(part.off_y(), part.off_y(), nb, nb) = spec.M1_33;

    // F = (−N∂₁; −C) on x₀ in orthonormal coordinates (cells and interior nodes both carry weight h).
    const Mat& N = spec.N;
    Mat F = Mat::Zero(part.h1(), part.n0);
    for (int i = 1; i < n; ++i) {
        const int r = (i - 1) * ell;
        F.block(r, i * ell, ell, ell) += -N / h;
        F.block(r, (i - 1) * ell, ell, ell) += N / h;
    }
    const double rs = 1.0 / std::sqrt(h);
    F.block(part.n1, (n - 1) * ell, ell, ell) = N * rs;  // w₁ row: +N x₀(b)
    F.block(part.n1 + ell, 0, ell, ell) = -N * rs;       // w₂ row: −N x₀(a)

    // F*(x₁, w) = N*∂₁z for the node field z = (w₂, x₁, w₁), evaluated on cells.
    Mat Fs = Mat::Zero(part.n0, part.h1());
    const Mat Nh = N.adjoint();
    auto z_col = [&](int node) { return node == 0 ? part.n1 + ell : node == n ? part.n1 : (node - 1) * ell; };
    // Interior node columns carry 1/h, boundary columns (w) carry 1/√h.
    for (int j = 0; j < n; ++j) {
        for (int node : {j, j + 1}) {
            const double sgn = node == j + 1 ? 1.0 : -1.0;
            const double coef = (node == 0 || node == n) ? rs : 1.0 / h;
            Fs.block(j * ell, z_col(node), ell, ell) = sgn * Nh * coef;
        }
    }

    Mat B = Mat::Zero(dim, m);
    B.middleRows(part.off_w(), nb) = spec.B1;
    B.middleRows(part.off_y(), nb) = spec.B2;

    PortHamiltonianModel model;
    model.sys = assemble_control_from_F(part, M0, M1, F, Fs, B);
    model.grid = grid;
    model.ell = ell;
    model.N = N;
    model.M1_22 = spec.M1_22;
    model.M1_23 = spec.M1_23;
    model.B1 = spec.B1;
    return model;
}

Mat PortHamiltonianModel::x1_nodal(const Vec& x) const {
    const auto& p = sys.part;
    const int n = grid.n_cells;
    const double sh = std::sqrt(grid.h());
    Mat z(n + 1, ell);
    for (int i = 1; i < n; ++i) z.row(i) = x.segment(p.off1() + (i - 1) * ell, ell).transpose() / sh;
    z.row(n) = x.segment(p.off_w(), ell).transpose();
    z.row(0) = x.segment(p.off_w() + ell, ell).transpose();
    return z;
}

Mat PortHamiltonianModel::x0_cells(const Vec& x) const {
    const int n = grid.n_cells;
    const double sh = std::sqrt(grid.h());
    Mat c(n, ell);
    for (int j = 0; j < n; ++j) c.row(j) = x.segment(j * ell, ell).transpose() / sh;
    return c;
}

double PortHamiltonianModel::coupling_defect(const Vec& x) const {
    const auto& p = sys.part;
    const Mat z = x1_nodal(x);
    const Vec w1 = x.segment(p.off_w(), ell), w2 = x.segment(p.off_w() + ell, ell);
    const double db = (z.row(grid.n_cells).transpose() - w1).cwiseAbs().maxCoeff();
    const double da = (z.row(0).transpose() - w2).cwiseAbs().maxCoeff();
    return std::max(da, db);
}

double PortHamiltonianModel::boundary_row_residual(const Vec& x, const Vec& u) const {
    const auto& p = sys.part;
    const Mat z = x1_nodal(x), c = x0_cells(x);
    Vec trace(2 * ell), flux(2 * ell);
    trace << z.row(grid.n_cells).transpose(), z.row(0).transpose();
    flux << N * c.row(grid.n_cells - 1).transpose(), -(N * c.row(0).transpose());
    const Vec r = M1_22 * trace + M1_23 * x.segment(p.off_y(), p.ny) + flux - B1 * u;
    return r.cwiseAbs().maxCoeff();
}

// ================================================================ wave

void RegionIndicators::validate(int n_nodes, int n_cells) const {
    auto check = [](const RVec& e, const RVec& p, const RVec& h, int n, const char* what) {
        if (e.size() != n || p.size() != n || h.size() != n)
            throw SpecError(std::string(what) + " indicators have the wrong length");
        for (int i = 0; i < n; ++i) {
            for (double v : {e(i), p(i), h(i)})
                if (v != 0.0 && v != 1.0) throw SpecError(std::string(what) + " indicators must be 0/1");
            const double s = e(i) + p(i) + h(i);
            if (s != 1.0) {
                std::ostringstream os;
                os << what << " regions " << (s > 1.0 ? "overlap" : "leave a gap") << " at index " << i;
                throw SpecError(os.str());
            }
        }
    };
    check(node_e, node_p, node_h, n_nodes, "node");
    check(cell_e, cell_p, cell_h, n_cells, "cell");
}

RegionIndicators indicators_from(const Grid1D& grid, const std::function<Region(double)>& region) {
    RegionIndicators r;
    const int nn = grid.n_nodes(), nc = grid.n_cells;
    r.node_e = r.node_p = r.node_h = RVec::Zero(nn);
    r.cell_e = r.cell_p = r.cell_h = RVec::Zero(nc);
    auto mark = [](Region g, RVec& e, RVec& p, RVec& h, int i) {
        (g == Region::elliptic ? e : g == Region::parabolic ? p : h)(i) = 1.0;
    };
    for (int i = 0; i < nn; ++i) mark(region(grid.node(i)), r.node_e, r.node_p, r.node_h, i);
    for (int j = 0; j < nc; ++j) mark(region(grid.midpoint(j)), r.cell_e, r.cell_p, r.cell_h, j);
    return r;
}

WaveModel build_mixed_type_wave(const WaveSpec& spec, const RegionIndicators& regions) {
    WaveModel model;
    model.pair = build_sbp_pair_1d(spec.grid);
    const GradDivPair& pair = model.pair;
    regions.validate(pair.n_nodes(), pair.n_cells());
    model.regions = regions;

    const auto bdG = compute_bd_space(pair, BdSide::G);
    const auto bdD = compute_bd_space(pair, BdSide::D);
    const int nd = bdG.dim();
    const Mat Gdot = dot_map(bdG, bdD, pair);
    model.U = build_u_space(bdG, bdD, spec.N_map.size() ? spec.N_map : Gdot, pair);
    model.b_map = spec.b_map.size() ? spec.b_map : Mat(Mat::Identity(nd, nd));
    require_shape(model.b_map.rows() == nd && model.b_map.cols() == nd, "b_map must act on U");

    const int nn = pair.n_nodes(), nc = pair.n_cells();
    BlockPartition part{nn, nc, nd, nd, nd};
    const int dim = part.dim();
    const double r2 = std::sqrt(2.0);
    const Mat Id = Mat::Identity(nd, nd);

    Mat M0 = Mat::Zero(dim, dim), M1 = Mat::Zero(dim, dim);
    M0.block(0, 0, nn, nn) = diag_c(regions.node_h + regions.node_p);
    M0.block(nn, nn, nc, nc) = diag_c(regions.cell_h);
    M1.block(0, 0, nn, nn) = diag_c(regions.node_e);
    M1.block(nn, nn, nc, nc) = diag_c(regions.cell_e + regions.cell_p);
    M1.block(part.off_w(), part.off_w(), nd, nd) = Id;
    if (!spec.zero_damping) {
        M1.block(part.off_y(), part.off_w(), nd, nd) = r2 * Id;
        M1.block(part.off_y(), part.off_y(), nd, nd) = Id;
    }

    Mat B = Mat::Zero(dim, nd);
    B.middleRows(part.off_w(), nd) = -r2 * Id;
    B.middleRows(part.off_y(), nd) = -Id;

    // C = −b·j·π_BD(G), U carrying the inner product of the U-space.
    const Mat C_nodal = -model.b_map * bdG.projector;
    model.sys = assemble_control(part, M0, M1, pair, C_nodal, model.U.gram, B);
    return model;
}

WaveModel build_weiss_tucsnak_wave(const WaveSpec& spec) {
    const Grid1D g = Grid1D::make(spec.grid.a, spec.grid.b, spec.grid.n_cells);
    return build_mixed_type_wave(spec, indicators_from(g, [](double) { return Region::hyperbolic; }));
}

Vec WaveModel::initial_state(const Vec& z1, const Vec& z0) const {
    Vec x = Vec::Zero(sys.part.dim());
    if (z1.size()) {
        require_shape(z1.size() == pair.n_nodes(), "z1 must be a node vector");
        x.head(pair.n_nodes()) = diag_c(pair.w0.cwiseSqrt()) * z1;
    }
    if (z0.size()) {
        require_shape(z0.size() == pair.n_cells(), "z0 must be a cell vector");
        x.segment(sys.part.off1(), pair.n_cells()) = diag_c(pair.w1.cwiseSqrt()) * z0;
    }
    return x;
}

Vec WaveModel::v(const Vec& x) const { return diag_c(pair.w0.cwiseSqrt().cwiseInverse()) * x.head(pair.n_nodes()); }

Vec WaveModel::zeta(const Vec& x) const {
    return diag_c(pair.w1.cwiseSqrt().cwiseInverse()) * x.segment(sys.part.off1(), pair.n_cells());
}

double WaveModel::elliptic_residual(const Vec& x) const {
    const Vec vv = v(x);
    const Vec r = vv - pair.D * (pair.G * vv);
    double worst = 0.0;
    for (int i = 1; i < pair.n_nodes() - 1; ++i)
        if (regions.node_e(i) == 1.0 && regions.cell_e(i - 1) == 1.0 && regions.cell_e(i) == 1.0)
            worst = std::max(worst, std::abs(r(i)));
    return worst;
}

// ================================================================ boundary lifting

LiftResult maxwell_lift_solve(const GradDivPair& pair, const Mat& eps_in, const Mat& mu_in, const Sampler& u_bd,
                              const Vec& E0, const Vec& Htilde0, const TimeGrid& grid, Scheme scheme) {
    const int nn = pair.n_nodes(), nc = pair.n_cells();
    const Mat eps = eps_in.size() ? eps_in : Mat(Mat::Identity(nn, nn));
    const Mat mu = mu_in.size() ? mu_in : Mat(Mat::Identity(nc, nc));
    require_shape(eps.rows() == nn && eps.cols() == nn, "eps must act on nodes");
    require_shape(mu.rows() == nc && mu.cols() == nc, "mu must act on cells");
    for (const Mat* m : {&eps, &mu}) {
        Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(*m), Eigen::EigenvaluesOnly);
        if (max_abs(*m - m->adjoint()) > 1e-12 * max_abs(*m) || es.eigenvalues()(0) <= 0.0)
            throw SpecError("eps and mu must be symmetric positive definite");
    }
    require_shape(E0.size() == nn && Htilde0.size() == nc, "initial fields");

    const auto bdD = compute_bd_space(pair, BdSide::D);
    const int nd = bdD.dim();
    const Mat& lift = bdD.embedding;  // π*_BD(D)

    std::vector<int> inner;
    for (int j = 0; j < nc; ++j)
        if (pair.minimal_cells[j]) inner.push_back(j);
    const int ni = static_cast<int>(inner.size());
    Mat P = Mat::Zero(ni, nc);  // restriction to minimal cells
    for (int r = 0; r < ni; ++r) P(r, inner[r]) = 1.0;

    const double tau = grid.tau();
    const double half = scheme == Scheme::backward_euler ? tau : 0.5 * tau;
    auto du = [&](double t) { return Vec((u_bd(t + half) - u_bd(t - half)) / (2.0 * half)); };

    // Lifted: unknown (E, H̃ restricted to minimal cells).
    const int nl = nn + ni;
    Mat El = Mat::Zero(nl, nl), Kl = Mat::Zero(nl, nl);
    El.block(0, 0, nn, nn) = eps;
    El.block(nn, nn, ni, ni) = P * mu * P.transpose();
    Kl.block(0, nn, nn, ni) = pair.D * P.transpose();
    Kl.block(nn, 0, ni, nn) = P * pair.G;
    const Mat Dl = pair.D * lift, Ml = P * mu * lift;
    Sampler fl = [&](double t) {
        Vec f(nl);
        f.head(nn) = -(Dl * u_bd(t));
        f.tail(ni) = -(Ml * du(t));
        return f;
    };
    Vec xl0(nl);
    xl0 << E0, P * Htilde0;
    LiftResult res;
    res.lifted = solve_descriptor(El, Kl, Mat::Identity(nl, nl), xl0, fl, grid, scheme, false);

    // Direct: unknown (E, H) with the boundary data of H prescribed algebraically.
    const int ndir = nn + nc;
    Mat Ed = Mat::Zero(ndir, ndir), Kd = Mat::Zero(ndir, ndir);
    Ed.block(0, 0, nn, nn) = eps;
    Ed.block(nn, nn, ni, nc) = P * mu;
    Kd.block(0, nn, nn, nc) = pair.D;
    Kd.block(nn, 0, ni, nn) = P * pair.G;
    Kd.block(nn + ni, nn, nd, nc) = bdD.projector;
    Mat Jd = Mat::Zero(ndir, nd);
    Jd.bottomRows(nd) = Mat::Identity(nd, nd);
    Vec xd0(ndir);
    xd0 << E0, P.transpose() * (P * Htilde0) + lift * u_bd(0.0);
    res.direct = solve_descriptor(Ed, Kd, Jd, xd0, u_bd, grid, scheme, false);

    for (int k = 0; k <= grid.n_steps; ++k) {
        const Vec& xl = res.lifted.states[k];
        Vec H = P.transpose() * xl.tail(ni) + lift * u_bd(grid.t(k));
        const Vec& xd = res.direct.states[k];
        const double g = std::max((xd.head(nn) - xl.head(nn)).cwiseAbs().maxCoeff(),
                                  (xd.tail(nc) - H).cwiseAbs().maxCoeff());
        res.H_unlifted.push_back(std::move(H));
        res.gap.push_back(g);
        res.max_gap = std::max(res.max_gap, g);
    }
    return res;
}

}  // namespace evoctl
