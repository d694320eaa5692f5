#include "evoctl/bdspace.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace evoctl {

namespace {

constexpr double kRankCutoff = 1e-8;
constexpr double kAmbiguityBand = 1e2;

Mat null_space(const Mat& A) {
    const bool real = A.imag().cwiseAbs().maxCoeff() == 0.0;
    RVec s;
    Mat V;
    if (real) {
        Eigen::BDCSVD<RMat> svd(A.real(), Eigen::ComputeFullV);
        s = svd.singularValues();
        V = svd.matrixV().cast<cplx>();
    } else {
        Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeFullV);
        s = svd.singularValues();
        V = svd.matrixV();
    }
    const double smax = s.size() ? s(0) : 0.0;
    const double cut = kRankCutoff * smax;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (s(i) > cut) {
            if (s(i) <= kAmbiguityBand * cut) {
                std::ostringstream os;
                os << "ambiguous numerical rank: singular value " << s(i) << " near cutoff " << cut;
                throw NumericalRankError(os.str());
            }
            ++rank;
        }
    }
    const int k = static_cast<int>(A.cols()) - rank;
    if (k == 0) throw NumericalRankError("boundary data space is trivial (full numerical rank)");
    return V.rightCols(k);
}

// Modified Gram–Schmidt in the inner product xᴴ·gram·y, two passes.
Mat graph_orthonormalize(const Mat& V, const Mat& gram) {
    Mat Q = V;
    for (int k = 0; k < Q.cols(); ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) {
                const cplx c = Q.col(j).dot(gram * Q.col(k));
                Q.col(k) -= c * Q.col(j);
            }
        }
        const double nrm = std::sqrt(std::abs(Q.col(k).dot(gram * Q.col(k))));
        if (nrm == 0.0) throw NumericalRankError("linearly dependent boundary data vectors");
        Q.col(k) /= nrm;
        Eigen::Index imax;
        Q.col(k).cwiseAbs().maxCoeff(&imax);
        const cplx ph = Q(imax, k) / std::abs(Q(imax, k));
        Q.col(k) *= std::conj(ph);
    }
    return Q;
}

}  // namespace

Mat graph_gram(const GradDivPair& pair, BdSide side) {
    if (side == BdSide::G) return diag_c(pair.w0) + pair.G.adjoint() * diag_c(pair.w1) * pair.G;
    return diag_c(pair.w1) + pair.D.adjoint() * diag_c(pair.w0) * pair.D;
}

BoundaryDataSpace compute_bd_space(const GradDivPair& pair, BdSide side) {
    const Mat op = side == BdSide::G ? Mat(pair.D * pair.G) : Mat(pair.G * pair.D);
    const Mat A = Mat::Identity(op.rows(), op.cols()) - op;
    BoundaryDataSpace bd;
    bd.side = side;
    bd.gram = graph_gram(pair, side);
    bd.basis = graph_orthonormalize(null_space(A), bd.gram);
    bd.embedding = bd.basis;
    bd.projector = bd.basis.adjoint() * bd.gram;
    return bd;
}

Mat dot_map(const BoundaryDataSpace& from, const BoundaryDataSpace& to, const GradDivPair& pair) {
    require_shape(from.side != to.side, "dot_map needs one G-side and one D-side space");
    const Mat& op = from.side == BdSide::G ? pair.G : pair.D;
    return to.projector * op * from.basis;
}

Mat riesz_map(const GradDivPair& pair) {
    const Mat gram = graph_gram(pair, BdSide::G);
    Eigen::PartialPivLU<Mat> lu(gram);
    const double rc = lu.rcond();
    if (rc < 1e-12) std::cerr << "warning: graph Gram condition estimate " << 1.0 / rc << " exceeds 1e12\n";
    return lu.solve(diag_c(pair.w0));
}

Mat minimal_div_extended(const GradDivPair& pair) {
    return -(diag_c(pair.w0.cwiseInverse()) * pair.G.adjoint() * diag_c(pair.w1));
}

Mat dual_projection(const BoundaryDataSpace& bdG, const BoundaryDataSpace& bdD, const GradDivPair& pair) {
    const Mat Gdot = dot_map(bdG, bdD, pair);
    return bdG.embedding - minimal_div_extended(pair) * bdD.embedding * Gdot;
}

USpace build_u_space(const BoundaryDataSpace& bdG, const BoundaryDataSpace& bdD, const Mat& N_map,
                     const GradDivPair& pair) {
    require_shape(N_map.rows() == bdD.dim() && N_map.cols() == bdG.dim(), "N_map must map BD(G) to BD(D)");
    const Mat Gdot = dot_map(bdG, bdD, pair);
    const Mat Ddot = dot_map(bdD, bdG, pair);
    USpace u;
    u.N_map = N_map;
    u.gram = 0.5 * (N_map.adjoint() * Gdot + Gdot.adjoint() * N_map);
    u.j_adjoint = 0.5 * (Ddot * N_map + N_map.adjoint() * Gdot);
    Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(u.gram));
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) <= 1e-12 * scale) {
        std::ostringstream os;
        os << "U form is not an inner product: smallest eigenvalue " << es.eigenvalues()(0);
        throw NotAnInnerProductError(os.str(), es.eigenvectors().col(0));
    }
    return u;
}

double boundary_triple_defect(const GradDivPair& pair, const BoundaryDataSpace& bdG,
                              const BoundaryDataSpace& bdD, const Vec& x, const Vec& y,
                              const Vec& x2, const Vec& y2) {
    require_shape(x.size() == pair.n_nodes() && x2.size() == pair.n_nodes(), "node components");
    require_shape(y.size() == pair.n_cells() && y2.size() == pair.n_cells(), "cell components");
    // S* = −i[[0, D], [G, 0]]
    const Vec Sx = -I_unit * (pair.D * y);
    const Vec Sy = -I_unit * (pair.G * x);
    const Vec Sx2 = -I_unit * (pair.D * y2);
    const Vec Sy2 = -I_unit * (pair.G * x2);
    const cplx lhs = (wdot(Sx, pair.w0, x2) + wdot(Sy, pair.w1, y2)) -
                     (wdot(x, pair.w0, Sx2) + wdot(y, pair.w1, Sy2));
    const Mat Ddot = dot_map(bdD, bdG, pair);
    const Vec g0 = bdG.projector * x;
    const Vec g0_2 = bdG.projector * x2;
    const Vec g1 = I_unit * (Ddot * (bdD.projector * y));
    const Vec g1_2 = I_unit * (Ddot * (bdD.projector * y2));
    const cplx rhs = g0.dot(g1_2) - g1.dot(g0_2);
    return std::abs(lhs - rhs);
}

double boundary_triple_defect(const GradDivPair& pair, const Vec& x, const Vec& y, const Vec& x2,
                              const Vec& y2) {
    const auto bdG = compute_bd_space(pair, BdSide::G);
    const auto bdD = compute_bd_space(pair, BdSide::D);
    return boundary_triple_defect(pair, bdG, bdD, x, y, x2, y2);
}

}  // namespace evoctl
