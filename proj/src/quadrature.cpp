#include "dsqkd/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsqkd/errors.hpp"

namespace dsqkd {

void FluctuationGrid::validate() const {
    if (nodes.empty() || nodes.size() != weights.size())
        throw GridTooCoarse("fluctuation grid is empty or inconsistent");
    double mass = 0.0;
    for (double w : weights) mass += w;
    if (std::abs(mass - 1.0) > 1e-9)
        throw GridTooCoarse("grid weights sum to " + std::to_string(mass));
}

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    GaussLegendre gl;
    gl.nodes.resize(static_cast<size_t>(n));
    gl.weights.resize(static_cast<size_t>(n));
    // Newton iteration from the Chebyshev-angle initial guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence up to P_n.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gl.nodes[static_cast<size_t>(i)] = x;
        gl.weights[static_cast<size_t>(i)] =
            2.0 / ((1.0 - x * x) * pp * pp);
    }
    return gl;
}

FluctuationGrid make_uniform_grid(const FluctuationBounds& bounds,
                                  int points_per_axis) {
    bounds.validate();
    if (points_per_axis < 1)
        throw std::invalid_argument("points_per_axis < 1");

    auto axis = [&](double bound) -> GaussLegendre {
        if (bound == 0.0) return GaussLegendre{{0.0}, {2.0}};
        GaussLegendre gl = gauss_legendre(points_per_axis);
        for (double& x : gl.nodes) x *= bound;
        return gl;
    };
    const GaussLegendre ax_delta = axis(bounds.delta);
    const GaussLegendre ax_eps_d = axis(bounds.eps_d);
    const GaussLegendre ax_eps_s = axis(bounds.eps_s);

    FluctuationGrid grid;
    for (size_t a = 0; a < ax_delta.nodes.size(); ++a)
        for (size_t b = 0; b < ax_eps_d.nodes.size(); ++b)
            for (size_t c = 0; c < ax_eps_s.nodes.size(); ++c) {
                grid.nodes.push_back({ax_delta.nodes[a], ax_eps_d.nodes[b],
                                      ax_eps_s.nodes[c]});
                // Uniform density: GL weight / interval length 2.
                grid.weights.push_back(ax_delta.weights[a] *
                                       ax_eps_d.weights[b] *
                                       ax_eps_s.weights[c] / 8.0);
            }
    grid.validate();
    return grid;
}

}  // namespace dsqkd
