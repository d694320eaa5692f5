#pragma once

#include "evoctl/control_system.hpp"

#include <functional>

namespace evoctl {

// ---------------------------------------------------------------- port-Hamiltonian

/// ẋ = P₁∂₁Hx + P₀Hx with P₁ unitarily equivalent to [[0, N*], [N, 0]].
/// x₀ lives on cells, x₁ on interior nodes; the boundary unknowns
/// w = (w₁, w₂) are the values of x₁ at b and a.
struct PortHamiltonianSpec {
    Grid1D grid;
    Mat N;                              // ℓ×ℓ, invertible
    std::function<Mat(double)> H;       // 2ℓ×2ℓ density, block diagonal in (x₀, x₁)
    Mat P0;                             // 2ℓ×2ℓ
    Mat M1_22, M1_23, M1_32, M1_33;     // 2ℓ×2ℓ each
    Mat B1, B2;                         // 2ℓ×m
};

struct PortHamiltonianModel {
    ControlSystem sys;
    Grid1D grid;
    int ell = 1;

    /// Physical x₁ as a node field (n+1 nodes × ℓ), endpoints read from w.
    Mat x1_nodal(const Vec& x) const;
    /// Physical x₀ per cell (n × ℓ).
    Mat x0_cells(const Vec& x) const;
    /// max(|x₁(b) − w₁|, |x₁(a) − w₂|)
    double coupling_defect(const Vec& x) const;
    /// Residual of M₁,₂₂(x₁(b), x₁(a)) + M₁,₂₃y + (Nx₀(b), −Nx₀(a)) − B₁u.
    double boundary_row_residual(const Vec& x, const Vec& u) const;
    Mat N, M1_22, M1_23, B1;
};

PortHamiltonianModel build_port_hamiltonian(const PortHamiltonianSpec& spec);

// ---------------------------------------------------------------- wave

struct WaveSpec {
    Grid1D grid;
    Mat b_map;       // operator on U in BD(G) coordinates; empty means identity
    Mat N_map;       // BD(G) → BD(D); empty means Ġ
    Vec z1;          // initial v on nodes (empty: zero)
    Vec z0;          // initial ζ on cells (empty: zero)
    bool zero_damping = false;  // drop the Y rows of M₁ (deliberately ill-posed)
};

enum class Region { elliptic, parabolic, hyperbolic };

/// Per-node and per-cell 0/1 indicators of the three regions.
struct RegionIndicators {
    RVec node_e, node_p, node_h;
    RVec cell_e, cell_p, cell_h;
    void validate(int n_nodes, int n_cells) const;
};

RegionIndicators indicators_from(const Grid1D& grid, const std::function<Region(double)>& region);

struct WaveModel {
    ControlSystem sys;
    GradDivPair pair;
    USpace U;
    Mat b_map;
    RegionIndicators regions;

    Vec initial_state(const Vec& z1, const Vec& z0) const;
    Vec v(const Vec& x) const;
    Vec zeta(const Vec& x) const;
    Vec w(const Vec& x) const { return x.segment(sys.part.off_w(), sys.part.nv); }
    Vec y(const Vec& x) const { return x.segment(sys.part.off_y(), sys.part.ny); }
    /// C·v in orthonormal U coordinates.
    Vec Cv(const Vec& x) const { return sys.F.bottomRows(sys.part.nv) * x.head(sys.part.n0); }
    /// max |v − DGv| over interior elliptic nodes whose neighbouring cells are elliptic.
    double elliptic_residual(const Vec& x) const;
};

WaveModel build_weiss_tucsnak_wave(const WaveSpec& spec);
WaveModel build_mixed_type_wave(const WaveSpec& spec, const RegionIndicators& regions);

// ---------------------------------------------------------------- boundary lifting

struct LiftResult {
    Trajectory lifted;   // (E, H̃ on minimal cells)
    Trajectory direct;   // (E, H)
    std::vector<Vec> H_unlifted;
    std::vector<double> gap;  // per grid point, max-norm difference of (E, H)
    double max_gap = 0.0;
};

/// ∂₀εE + D̊H̃ = −Dπ*u, ∂₀μH̃ + G̊E = −∂₀μπ*u (lifted) against
/// ∂₀εE + DH = 0, ∂₀μH + GE = 0 on minimal cells, π_BD(D)H = u (direct).
LiftResult maxwell_lift_solve(const GradDivPair& pair, const Mat& eps, const Mat& mu, const Sampler& u_bd,
                              const Vec& E0, const Vec& Htilde0, const TimeGrid& grid, Scheme scheme);

}  // namespace evoctl
