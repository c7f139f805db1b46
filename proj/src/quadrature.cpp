#include "flatctl/detail/quadrature.hpp"

#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "flatctl/errors.hpp"

namespace flatctl::detail {

QuadratureRule composite_gauss(std::span<const double> breakpoints, std::span<const int> panels) {
    if (breakpoints.size() < 2) throw DomainError("composite_gauss: need at least two breakpoints");
    if (panels.size() + 1 != breakpoints.size()) throw MismatchError("composite_gauss: one panel count per interval");

    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();

    QuadratureRule rule;
    for (std::size_t b = 0; b + 1 < breakpoints.size(); ++b) {
        const double lo = breakpoints[b];
        const double hi = breakpoints[b + 1];
        if (!(hi > lo)) throw DomainError("composite_gauss: breakpoints must be strictly increasing");
        const int count = panels[b];
        if (count < 1) throw DomainError("composite_gauss: panel count must be >= 1");
        const double width = (hi - lo) / count;
        for (int p = 0; p < count; ++p) {
            const double mid = lo + (p + 0.5) * width;
            const double half = 0.5 * width;
            // Boost stores only the nonnegative half of the symmetric rule.
            for (std::size_t i = 0; i < abscissa.size(); ++i) {
                rule.nodes.push_back(mid + half * abscissa[i]);
                rule.weights.push_back(half * weights[i]);
                if (abscissa[i] != 0.0) {
                    rule.nodes.push_back(mid - half * abscissa[i]);
                    rule.weights.push_back(half * weights[i]);
                }
            }
        }
    }
    return rule;
}

QuadratureRule composite_gauss(std::span<const double> breakpoints, int panels) {
    const std::vector<int> counts(breakpoints.empty() ? 0 : breakpoints.size() - 1, panels);
    return composite_gauss(breakpoints, counts);
}

}  // namespace flatctl::detail
