#pragma once

#include <vector>

#include "dsqkd/source.hpp"

namespace dsqkd {

// Finite quadrature over the fluctuation support. Every node must lie
// inside the bound box: the worst-case envelopes then cover each node, so
// expectation-mode soundness checks are exact regardless of grid fidelity.
struct FluctuationGrid {
    std::vector<FluctuationDraw> nodes;
    std::vector<double> weights;

    size_t size() const { return nodes.size(); }

    // Throws GridTooCoarse unless the weights sum to 1 within 1e-9.
    void validate() const;
};

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

// Tensor Gauss-Legendre grid over the nonzero axes of the bound box,
// matching the default independent-uniform draw law. Axes with zero bound
// collapse to a single node; a grid over an all-zero box has one node.
FluctuationGrid make_uniform_grid(const FluctuationBounds& bounds,
                                  int points_per_axis);

}  // namespace dsqkd
