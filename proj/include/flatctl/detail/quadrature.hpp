#pragma once

#include <span>
#include <vector>

namespace flatctl::detail {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Composite 20-point Gauss-Legendre rule. Interval i between consecutive
/// breakpoints is split into panels[i] equal panels.
QuadratureRule composite_gauss(std::span<const double> breakpoints, std::span<const int> panels);

/// Same, with the same panel count on every interval.
QuadratureRule composite_gauss(std::span<const double> breakpoints, int panels);

}  // namespace flatctl::detail
