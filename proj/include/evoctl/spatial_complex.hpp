#pragma once

#include "evoctl/linalg.hpp"

#include <utility>
#include <vector>

namespace evoctl {

struct Grid1D {
    double a = 0.0;
    double b = 1.0;
    int n_cells = 2;

    static Grid1D make(double a, double b, int n_cells);

    double h() const { return (b - a) / n_cells; }
    int n_nodes() const { return n_cells + 1; }
    double node(int i) const { return a + i * h(); }
    double midpoint(int j) const { return a + (j + 0.5) * h(); }
};

/// Staggered gradient/divergence pair. G maps nodes to cells, D maps cells
/// to nodes, and W0·D + Gᵀ·W1 = T with T supported on boundary nodes.
struct GradDivPair {
    Grid1D grid;
    Mat G;
    Mat D;
    RVec w0;
    RVec w1;
    Mat T;
    std::pair<int, int> boundary_nodes;
    std::vector<bool> minimal_nodes;
    std::vector<bool> minimal_cells;

    int n_nodes() const { return static_cast<int>(w0.size()); }
    int n_cells() const { return static_cast<int>(w1.size()); }
};

GradDivPair build_sbp_pair_1d(const Grid1D& grid);

/// |⟨Gu|v⟩_{W1} + ⟨u|Dv⟩_{W0} − uᴴTv|
double ibp_defect(const GradDivPair& pair, const Vec& u, const Vec& v);

enum class Side { node, cell };

/// Orthogonal projector onto the zero-boundary node vectors or the minimal cells.
Mat minimal_projector(const GradDivPair& pair, Side side);

}  // namespace evoctl
