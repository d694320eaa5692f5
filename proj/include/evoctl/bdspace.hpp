#pragma once

#include "evoctl/spatial_complex.hpp"

namespace evoctl {

enum class BdSide { G, D };

/// Graph Gram matrix: W0 + GᴴW1G on nodes (side G) or W1 + DᴴW0D on cells (side D).
Mat graph_gram(const GradDivPair& pair, BdSide side);

struct BoundaryDataSpace {
    BdSide side = BdSide::G;
    Mat basis;       // columns graph-orthonormal, spanning N(1−DG) resp. N(1−GD)
    Mat gram;        // graph Gram matrix of the ambient space
    Mat projector;   // π_BD: ambient vector -> coordinates
    Mat embedding;   // π*_BD: coordinates -> ambient vector

    int dim() const { return static_cast<int>(basis.cols()); }
};

BoundaryDataSpace compute_bd_space(const GradDivPair& pair, BdSide side);

/// Ġ (from = G side) or Ḋ (from = D side) in basis coordinates.
Mat dot_map(const BoundaryDataSpace& from, const BoundaryDataSpace& to, const GradDivPair& pair);

/// (I + G*G)⁻¹ with G* the weighted adjoint, acting on node vectors.
Mat riesz_map(const GradDivPair& pair);

/// −G* = −W0⁻¹GᴴW1; agrees with D on the minimal cells.
Mat minimal_div_extended(const GradDivPair& pair);

/// π◇ = π*_{BD(G)} − D̊ π*_{BD(D)} Ġ.
Mat dual_projection(const BoundaryDataSpace& bdG, const BoundaryDataSpace& bdD, const GradDivPair& pair);

struct USpace {
    Mat N_map;
    Mat gram;        // ½(NᴴĠ + ĠᴴN)
    Mat j_adjoint;   // ½(ḊN + N*Ġ)
};

USpace build_u_space(const BoundaryDataSpace& bdG, const BoundaryDataSpace& bdD, const Mat& N_map,
                     const GradDivPair& pair);

/// |(⟨S*X|X2⟩ − ⟨X|S*X2⟩) − (⟨Γ₀X|Γ₁X2⟩ − ⟨Γ₁X|Γ₀X2⟩)| for X = (x, y), X2 = (x2, y2).
double boundary_triple_defect(const GradDivPair& pair, const BoundaryDataSpace& bdG,
                              const BoundaryDataSpace& bdD, const Vec& x, const Vec& y,
                              const Vec& x2, const Vec& y2);

double boundary_triple_defect(const GradDivPair& pair, const Vec& x, const Vec& y, const Vec& x2,
                              const Vec& y2);

}  // namespace evoctl
