#include <doctest.h>

#include "evoctl/bdspace.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace evoctl;

namespace {

int brute_force_kernel_dim(const Mat& A) {
    Eigen::JacobiSVD<RMat> svd(A.real());
    const auto& s = svd.singularValues();
    int k = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < 1e-8 * s(0)) ++k;
    return k;
}

struct Setup {
    GradDivPair p;
    BoundaryDataSpace bdG, bdD;
    explicit Setup(int n, double a = 0.0, double b = 1.0)
        : p(build_sbp_pair_1d(Grid1D::make(a, b, n))),
          bdG(compute_bd_space(p, BdSide::G)),
          bdD(compute_bd_space(p, BdSide::D)) {}
};

Vec zero_boundary(Vec u) {
    u(0) = 0.0;
    u(u.size() - 1) = 0.0;
    return u;
}

}  // namespace

TEST_CASE("boundary data spaces are two dimensional") {
    for (int n : {4, 8, 16, 64}) {
        Setup s(n);
        const int nn = s.p.n_nodes();
        const int nc = s.p.n_cells();
        CHECK(brute_force_kernel_dim(Mat::Identity(nn, nn) - s.p.D * s.p.G) == 2);
        CHECK(brute_force_kernel_dim(Mat::Identity(nc, nc) - s.p.G * s.p.D) == 2);
        CHECK(s.bdG.dim() == 2);
        CHECK(s.bdD.dim() == 2);
    }
}

TEST_CASE("basis invariants") {
    std::mt19937_64 rng(3);
    Setup s(16);
    const int nn = s.p.n_nodes();
    const int nc = s.p.n_cells();
    CHECK(max_abs((Mat::Identity(nn, nn) - s.p.D * s.p.G) * s.bdG.basis) <= 1e-10);
    CHECK(max_abs((Mat::Identity(nc, nc) - s.p.G * s.p.D) * s.bdD.basis) <= 1e-10);
    CHECK(max_abs(s.bdG.basis.adjoint() * s.bdG.gram * s.bdG.basis - Mat::Identity(2, 2)) <= 1e-12);
    CHECK(max_abs(s.bdD.basis.adjoint() * s.bdD.gram * s.bdD.basis - Mat::Identity(2, 2)) <= 1e-12);
    for (int k = 0; k < 20; ++k) {
        Vec u = zero_boundary(testutil::random_vec(rng, nn));
        // ⟨u|φ⟩_graph written out as L² part plus gradient part.
        for (int c = 0; c < 2; ++c) {
            const Vec phi = s.bdG.basis.col(c);
            cplx ip = wdot(u, s.p.w0, phi) + wdot(s.p.G * u, s.p.w1, s.p.G * phi);
            CHECK(std::abs(ip) <= 1e-10);
        }
        CHECK(s.bdG.projector.rows() == 2);
        CHECK((s.bdG.projector * u).norm() <= 1e-10);
    }
}

TEST_CASE("projection of exp onto BD(G) converges at second order") {
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        Setup s(n);
        Vec u(s.p.n_nodes());
        for (int i = 0; i < s.p.n_nodes(); ++i) u(i) = std::exp(s.p.grid.node(i));
        Vec r = u - s.bdG.embedding * (s.bdG.projector * u);
        err.push_back(std::sqrt(std::abs(r.dot(s.bdG.gram * r))));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.3));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("dot maps are unitary and mutually inverse") {
    for (int n : {4, 16, 64}) {
        Setup s(n);
        Mat Q = dot_map(s.bdG, s.bdD, s.p);
        Mat Qd = dot_map(s.bdD, s.bdG, s.p);
        CHECK(max_abs(Q.adjoint() * Q - Mat::Identity(2, 2)) <= 1e-10);
        CHECK(max_abs(Qd * Q - Mat::Identity(2, 2)) <= 1e-10);
        CHECK(max_abs(Q * Qd - Mat::Identity(2, 2)) <= 1e-10);
        CHECK(max_abs(Qd - Q.adjoint()) <= 1e-10);
        // Graph isometry with full ambient Gram matrices.
        Mat GB = s.p.G * s.bdG.basis;
        CHECK(max_abs(GB.adjoint() * s.bdD.gram * GB - s.bdG.basis.adjoint() * s.bdG.gram * s.bdG.basis) <= 1e-10);
    }
}

TEST_CASE("dot map flips parity on a symmetric interval") {
    Setup s(20, -1.0, 1.0);
    const int nn = s.p.n_nodes();
    const int nc = s.p.n_cells();
    Mat Rn = Mat::Zero(nn, nn), Rc = Mat::Zero(nc, nc);
    for (int i = 0; i < nn; ++i) Rn(i, nn - 1 - i) = 1.0;
    for (int j = 0; j < nc; ++j) Rc(j, nc - 1 - j) = 1.0;
    // Even member of BD(G): symmetrize the basis vector with the larger even part.
    Vec even = s.bdG.basis.col(0) + Rn * s.bdG.basis.col(0);
    Vec alt = s.bdG.basis.col(1) + Rn * s.bdG.basis.col(1);
    if (alt.norm() > even.norm()) even = alt;
    even /= even(nn / 2);  // cosh-like: positive at the centre
    CHECK(max_abs((Mat::Identity(nn, nn) - s.p.D * s.p.G) * even) <= 1e-9);
    CHECK(even(0).real() > even(nn / 2).real());
    Mat Q = dot_map(s.bdG, s.bdD, s.p);
    Vec image = s.bdD.embedding * (Q * (s.bdG.projector * even));
    CHECK(max_abs(Rc * image + image) <= 1e-9);
    CHECK(image(0).real() < 0.0);
    CHECK(image(nc - 1).real() > 0.0);
}

TEST_CASE("orthogonal decomposition reconstructs node vectors") {
    std::mt19937_64 rng(9);
    Setup s(16);
    for (int k = 0; k < 100; ++k) {
        Vec u = testutil::random_vec(rng, s.p.n_nodes());
        Vec ub = s.bdG.embedding * (s.bdG.projector * u);
        Vec um = u - ub;
        CHECK(std::abs(um(0)) <= 1e-10);
        CHECK(std::abs(um(s.p.n_nodes() - 1)) <= 1e-10);
        CHECK(std::abs(um.dot(s.bdG.gram * ub)) <= 1e-10);
    }
}

TEST_CASE("riesz map") {
    std::mt19937_64 rng(13);
    Setup s(16);
    Mat R = riesz_map(s.p);
    const int nn = s.p.n_nodes();
    Vec u = testutil::random_vec(rng, nn);
    // Graph Gram in W0-representation is I + G*G.
    Mat GstarG = diag_c(s.p.w0.cwiseInverse()) * s.p.G.adjoint() * diag_c(s.p.w1) * s.p.G;
    CHECK(max_abs(R * (Mat::Identity(nn, nn) + GstarG) - Mat::Identity(nn, nn)) <= 1e-10);
    CHECK(max_abs(R * ((Mat::Identity(nn, nn) + GstarG) * u) - u) <= 1e-10);
    CHECK(max_abs(R * Vec::Ones(nn) - Vec::Ones(nn)) <= 1e-10);
    Vec phi = testutil::random_vec(rng, nn);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Vec psi = testutil::random_vec(rng, nn);
        const Vec Rphi = R * phi;
        cplx lhs = wdot(psi, s.p.w0, Rphi) + wdot(s.p.G * psi, s.p.w1, s.p.G * Rphi);
        worst = std::max(worst, std::abs(lhs - wdot(psi, s.p.w0, phi)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("dual projection") {
    Setup s(16);
    Mat R = riesz_map(s.p);
    Mat pd = dual_projection(s.bdG, s.bdD, s.p);
    CHECK(max_abs(R * pd - s.bdG.embedding) <= 1e-10);
    CHECK(max_abs(s.bdG.projector * R * pd - Mat::Identity(2, 2)) <= 1e-10);
    CHECK(max_abs(pd * Vec::Zero(2)) == 0.0);
    // Independent route: inverse of the graph Gram applied to W0-dual of the basis.
    Mat via_gram = diag_c(s.p.w0.cwiseInverse()) * s.bdG.gram * s.bdG.basis;
    CHECK(max_abs(pd - via_gram) <= 1e-9);
}

TEST_CASE("U space") {
    std::mt19937_64 rng(17);
    Setup s(16);
    Mat Q = dot_map(s.bdG, s.bdD, s.p);
    auto u = build_u_space(s.bdG, s.bdD, Q, s.p);
    CHECK(max_abs(u.gram - Mat::Identity(2, 2)) <= 1e-10);
    CHECK(max_abs(u.j_adjoint - Mat::Identity(2, 2)) <= 1e-10);

    bool thrown = false;
    try {
        build_u_space(s.bdG, s.bdD, -Q, s.p);
    } catch (const NotAnInnerProductError& e) {
        thrown = true;
        CHECK(e.witness.norm() == doctest::Approx(1.0));
        CHECK(std::real(e.witness.dot(-Q.adjoint() * Q * e.witness)) < 0.0);
    }
    CHECK(thrown);

    Mat N = Q * (Mat::Identity(2, 2) + 0.2 * testutil::random_mat(rng, 2, 2));
    auto u2 = build_u_space(s.bdG, s.bdD, N, s.p);
    for (int k = 0; k < 10; ++k) {
        Vec f = testutil::random_vec(rng, 2), g = testutil::random_vec(rng, 2);
        // Evaluate ½⟨Nf|Ġg⟩ + ½⟨Ġf|Ng⟩ with ambient BD(D) vectors and the graph Gram.
        Vec Nf = s.bdD.embedding * (N * f), Gg = s.p.G * (s.bdG.embedding * g);
        Vec Gf = s.p.G * (s.bdG.embedding * f), Ng = s.bdD.embedding * (N * g);
        cplx direct = 0.5 * Nf.dot(s.bdD.gram * Gg) + 0.5 * Gf.dot(s.bdD.gram * Ng);
        CHECK(std::abs(f.dot(u2.gram * g) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("boundary triple identity") {
    std::mt19937_64 rng(21);
    Setup s(16);
    const int nn = s.p.n_nodes(), nc = s.p.n_cells();
    Mat Pc = minimal_projector(s.p, Side::cell);
    Vec x = zero_boundary(testutil::random_vec(rng, nn));
    Vec y = Pc * testutil::random_vec(rng, nc);
    Vec x2 = zero_boundary(testutil::random_vec(rng, nn));
    Vec y2 = Pc * testutil::random_vec(rng, nc);
    CHECK(boundary_triple_defect(s.p, s.bdG, s.bdD, x, y, x2, y2) <= 1e-12);

    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Vec a = testutil::random_vec(rng, nn), b = testutil::random_vec(rng, nc);
        Vec c = testutil::random_vec(rng, nn), d = testutil::random_vec(rng, nc);
        worst = std::max(worst, boundary_triple_defect(s.p, s.bdG, s.bdD, a, b, c, d));
    }
    CHECK(worst <= 1e-10);

    Vec a = testutil::random_vec(rng, nn), b = testutil::random_vec(rng, nc);
    CHECK(boundary_triple_defect(s.p, a, b, a, b) <= 1e-12);
}
