#pragma once

#include "evoctl/bdspace.hpp"
#include "evoctl/evolution.hpp"

#include <optional>
#include <random>

namespace evoctl {

/// H = H₀ ⊕ H₁ ⊕ Y with H₁ = (interior part) ⊕ V and controls U₁.
/// Block 0 is H₀, block 1 is H₁ (both parts), block 2 is Y.
struct BlockPartition {
    int n0 = 0;  // H₀
    int n1 = 0;  // interior part of H₁
    int nv = 0;  // boundary part V of H₁ (the w unknowns)
    int ny = 0;  // Y
    int nu = 0;  // U₁

    int h1() const { return n1 + nv; }
    int dim() const { return n0 + n1 + nv + ny; }
    int off1() const { return n0; }
    int off_w() const { return n0 + n1; }
    int off_y() const { return n0 + n1 + nv; }
    int block_offset(int i) const { return i == 0 ? 0 : i == 1 ? n0 : off_y(); }
    int block_size(int i) const { return i == 0 ? n0 : i == 1 ? h1() : ny; }
    void validate() const;
};

/// Data needed to interpret boundary coupling built from a grad/div pair.
/// Physical coordinates relate to the orthonormal ones by x̂ = diag(√w0) v,
/// ζ̂ = diag(√w1) ζ, ŵ = Lᴴ w with gram_V = L Lᴴ.
struct BoundaryCoupling {
    GradDivPair pair;
    BoundaryDataSpace bdG, bdD;
    Mat K;        // C = K·π_BD(G)
    Mat K_sharp;  // Kᴴ·gram_V
    Mat gram_V;
    Mat L;
};

/// All operators act on orthonormal coordinates, so adjoints are conjugate transposes.
struct ControlSystem {
    BlockPartition part;
    Mat M0, M1, A, B;
    Mat F, F_star;  // F: H₀ → H₁, F*: H₁ → H₀
    Mat C, C_dual;  // V-rows of F up to sign convention, and C◇
    std::optional<BoundaryCoupling> coupling;

    Mat J() const;
    EvolutionarySystem evolutionary() const;
    double skew_defect() const { return max_abs(A + A.adjoint()); }
    Mat block(const Mat& M, int i, int j) const;
};

ControlSystem assemble_control(const BlockPartition& part, const Mat& M0, const Mat& M1, const GradDivPair& pair,
                               const Mat& C_nodal, const Mat& gram_V, const Mat& B);

/// Lower-level assembly from an explicit F and its adjoint (orthonormal coordinates).
ControlSystem assemble_control_from_F(const BlockPartition& part, const Mat& M0, const Mat& M1, const Mat& F,
                                      const Mat& F_star, const Mat& B);

/// max over draws of |⟨Fx|z⟩ − ⟨x|F*z⟩| / (|x||z|)
double adjoint_defect(const ControlSystem& sys, int draws, std::mt19937_64& rng);

struct CompatibilityDefects {
    double d0 = 0.0;
    double d1 = 0.0;
};

CompatibilityDefects check_compatibility(const Mat& M1_22, const Mat& M1_20, const Mat& M1_21, const Mat& B0,
                                         const Mat& B1, const Mat& B2);
CompatibilityDefects check_compatibility(const ControlSystem& sys);

/// f(t) = (0, u(t)) for J = [1 B].
Sampler control_source(const ControlSystem& sys, const Sampler& u);
Trajectory simulate(const ControlSystem& sys, const Vec& x0, const Sampler& u, const TimeGrid& grid, Scheme scheme);
std::vector<Vec> control_samples(const ControlSystem& sys, const Trajectory& traj);

struct EnergyLedger {
    double a = 0.0, b = 0.0;
    double stored_drop = 0.0;
    double dissipation = 0.0;
    double supply = 0.0;
    double defect = 0.0;
    double artificial_dissipation = 0.0;  // Σ ½⟨Δx|M₀Δx⟩ over backward-Euler steps
};

EnergyLedger energy_ledger(const ControlSystem& sys, const Trajectory& traj, const std::vector<Vec>& u_samples,
                           double a, double b);

/// Norm of π_BD(D)(ζ + D̊⁻¹C◇w) at every grid point.
std::vector<double> boundary_equation_defect(const ControlSystem& sys, const Trajectory& traj);
double boundary_equation_defect(const ControlSystem& sys, const Vec& x);

struct IoSamples {
    std::vector<double> t;
    std::vector<Vec> w, y;
    double max_deviation = 0.0;
};

IoSamples extract_io(const ControlSystem& sys, const Trajectory& traj);

}  // namespace evoctl
