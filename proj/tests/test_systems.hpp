#pragma once

#include "evoctl/control_system.hpp"
#include "test_util.hpp"

#include <cmath>

namespace testutil {

using namespace evoctl;

/// Random control system with skew A, ℜM₁ ≥ 0, M₀ > 0 off the Y block,
/// and B₀, B₁ chosen so the compatibility conditions hold exactly.
inline ControlSystem random_compatible_system(std::mt19937_64& rng, int n0, int n1, int ny, int nu) {
    BlockPartition part{n0, n1, 0, ny, nu};
    const int n = part.dim(), ns = n0 + n1;
    const double s = 1.0 / std::sqrt(double(n));

    const Mat R0 = random_mat(rng, ns, ns) * s;
    Mat M0 = Mat::Zero(n, n);
    M0.topLeftCorner(ns, ns) = R0 * R0.adjoint() + Mat::Identity(ns, ns);

    const Mat R1 = random_mat(rng, n, n) * s;
    const Mat S1 = random_mat(rng, n, n) * s;
    Mat M1 = 0.5 * R1 * R1.adjoint() + 0.5 * (S1 - S1.adjoint()) + 0.1 * Mat::Identity(n, n);

    const Mat F = random_mat(rng, n1, n0) * s;
    Mat B = Mat::Zero(n, nu);
    const Mat B2 = random_mat(rng, ny, nu) * s;
    const Eigen::FullPivLU<Mat> lu(M1.bottomRightCorner(ny, ny));
    const Mat S = lu.solve(M1.bottomLeftCorner(ny, ns));
    B.topRows(ns) = S.adjoint() * B2;
    B.bottomRows(ny) = B2;
    return assemble_control_from_F(part, M0, M1, F, F.adjoint(), B);
}

inline Sampler random_trig_input(std::mt19937_64& rng, int m, int terms = 3) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.5, 4.0), ph(0.0, 6.283185307179586);
    std::vector<double> a, f, p;
    for (int i = 0; i < m * terms; ++i) {
        a.push_back(amp(rng));
        f.push_back(freq(rng));
        p.push_back(ph(rng));
    }
    return [=](double t) {
        Vec u = Vec::Zero(m);
        for (int c = 0; c < m; ++c)
            for (int k = 0; k < terms; ++k) {
                const int i = c * terms + k;
                u(c) += a[i] * std::sin(f[i] * t + p[i]);
            }
        return u;
    };
}

}  // namespace testutil
