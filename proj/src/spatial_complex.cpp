#include "evoctl/spatial_complex.hpp"

#include <cmath>
#include <string>

namespace evoctl {

Grid1D Grid1D::make(double a, double b, int n_cells) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
        throw InvalidGridError("grid requires finite a < b");
    if (n_cells < 2)
        throw InvalidGridError("grid requires n_cells >= 2, got " + std::to_string(n_cells));
    return Grid1D{a, b, n_cells};
}

namespace {

// Node vectors φ with (φ − DGφ)_i = 0 at every interior node, for boundary values (1,0) and (0,1).
RMat harmonic_boundary_lift(const RMat& DG_interior, int n_nodes) {
    const int m = n_nodes - 2;
    RMat L = RMat::Identity(n_nodes, n_nodes) - DG_interior;
    RMat phi = RMat::Zero(n_nodes, 2);
    phi(0, 0) = 1.0;
    phi(n_nodes - 1, 1) = 1.0;
    if (m > 0) {
        RMat A = L.block(1, 1, m, m);
        Eigen::PartialPivLU<RMat> lu(A);
        for (int k = 0; k < 2; ++k) {
            RVec rhs = -(L.block(1, 0, m, 1) * phi(0, k) + L.block(1, n_nodes - 1, m, 1) * phi(n_nodes - 1, k));
            phi.block(1, k, m, 1) = lu.solve(rhs);
        }
    }
    return phi;
}

}  // namespace

GradDivPair build_sbp_pair_1d(const Grid1D& grid_in) {
    const Grid1D grid = Grid1D::make(grid_in.a, grid_in.b, grid_in.n_cells);
    const int n = grid.n_cells;
    const int nn = grid.n_nodes();
    const double h = grid.h();

    RMat G = RMat::Zero(n, nn);
    for (int j = 0; j < n; ++j) {
        G(j, j) = -1.0 / h;
        G(j, j + 1) = 1.0 / h;
    }
    RVec w0 = RVec::Constant(nn, h);
    w0(0) = w0(nn - 1) = 0.5 * h;
    RVec w1 = RVec::Constant(n, h);

    // Interior rows: D = −W0⁻¹GᵀW1, i.e. (v_i − v_{i−1})/h.
    RMat D = -(w0.cwiseInverse().asDiagonal() * G.transpose() * w1.asDiagonal());
    D.row(0).setZero();
    D.row(nn - 1).setZero();

    // Boundary rows read the first and last cell only and are fixed so that
    // both discrete 1-harmonic lifts satisfy DGφ = φ (discrete Dirichlet-to-Neumann closure).
    RMat phi = harmonic_boundary_lift(D * G, nn);
    RMat Gphi = G * phi;
    Eigen::Matrix2d M;
    M << Gphi(0, 0), Gphi(n - 1, 0), Gphi(0, 1), Gphi(n - 1, 1);
    Eigen::PartialPivLU<Eigen::Matrix2d> lu(M);
    const Eigen::Vector2d left = lu.solve(Eigen::Vector2d(1.0, 0.0));
    const Eigen::Vector2d right = lu.solve(Eigen::Vector2d(0.0, 1.0));
    D(0, 0) = left(0);
    D(0, n - 1) += left(1);
    D(nn - 1, 0) += right(0);
    D(nn - 1, n - 1) += right(1);

    RMat T = w0.asDiagonal() * D + G.transpose() * w1.asDiagonal();
    for (int i = 1; i < nn - 1; ++i) T.row(i).setZero();

    GradDivPair p;
    p.grid = grid;
    p.G = G.cast<cplx>();
    p.D = D.cast<cplx>();
    p.w0 = w0;
    p.w1 = w1;
    p.T = T.cast<cplx>();
    p.boundary_nodes = {0, nn - 1};
    p.minimal_nodes.assign(nn, true);
    p.minimal_nodes[0] = p.minimal_nodes[nn - 1] = false;
    p.minimal_cells.assign(n, true);
    p.minimal_cells[0] = p.minimal_cells[n - 1] = false;
    return p;
}

double ibp_defect(const GradDivPair& pair, const Vec& u, const Vec& v) {
    require_shape(u.size() == pair.n_nodes(), "u must be a node vector");
    require_shape(v.size() == pair.n_cells(), "v must be a cell vector");
    const cplx lhs = wdot(pair.G * u, pair.w1, v) + wdot(u, pair.w0, pair.D * v);
    const cplx bt = u.dot(pair.T * v);
    return std::abs(lhs - bt);
}

Mat minimal_projector(const GradDivPair& pair, Side side) {
    const auto& mask = side == Side::node ? pair.minimal_nodes : pair.minimal_cells;
    const int m = static_cast<int>(mask.size());
    Mat P = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
        if (mask[i]) P(i, i) = 1.0;
    return P;
}

}  // namespace evoctl
