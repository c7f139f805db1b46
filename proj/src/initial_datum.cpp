#include "flatctl/initial_datum.hpp"

#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "flatctl/errors.hpp"

namespace flatctl {

InitialDatum constant_datum(double c) {
    if (!std::isfinite(c)) throw ConfigError("constant initial datum must be finite");
    std::ostringstream label;
    label << "const " << c;
    return {[c](double) { return c; }, {}, label.str()};
}

InitialDatum polynomial_datum(std::vector<double> coeffs) {
    if (coeffs.empty()) throw ConfigError("polynomial initial datum needs at least one coefficient");
    std::ostringstream label;
    label << "poly";
    for (double c : coeffs) {
        if (!std::isfinite(c)) throw ConfigError("polynomial coefficients must be finite");
        label << ' ' << c;
    }
    auto eval = [c = std::move(coeffs)](double x) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    };
    return {std::move(eval), {}, label.str()};
}

SampledFunction::SampledFunction(std::vector<double> x, std::vector<double> f) : x_(std::move(x)), f_(std::move(f)) {
    if (x_.size() != f_.size()) throw ConfigError("sampled f0: x and f0 columns differ in length");
    if (x_.size() < 2) throw ConfigError("sampled f0: at least two samples required");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(f_[i])) throw ConfigError("sampled f0: non-finite sample");
        if (x_[i] < 0.0 || x_[i] > 1.0) throw ConfigError("sampled f0: x must lie in [0, 1]");
        if (i > 0 && !(x_[i] > x_[i - 1])) throw ConfigError("sampled f0: x must be strictly increasing");
    }
    if (x_.size() >= 4) {
        auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::vector<double>(x_),
                                                                                              std::vector<double>(f_));
        spline_ = [spline](double x) { return (*spline)(x); };
    }
}

double SampledFunction::operator()(double x) const {
    if (x <= x_.front()) return f_.front();
    if (x >= x_.back()) return f_.back();
    if (spline_) return spline_(x);
    // Boost's pchip needs four points; fewer samples fall back to linear.
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return (1.0 - w) * f_[i - 1] + w * f_[i];
}

SampledFunction read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open f0 samples file " + path.string());
    std::vector<double> x;
    std::vector<double> f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two comma-separated columns");
        }
        try {
            std::size_t used = 0;
            const double xv = std::stod(line.substr(0, comma), &used);
            const double fv = std::stod(line.substr(comma + 1));
            x.push_back(xv);
            f.push_back(fv);
        } catch (const std::invalid_argument&) {
            if (lineno == 1) continue;  // header
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
        } catch (const std::out_of_range&) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": value out of range");
        }
    }
    return SampledFunction(std::move(x), std::move(f));
}

InitialDatum sampled_datum(const SampledFunction& samples, std::string label) {
    std::vector<double> breaks;
    for (double k : samples.knots()) {
        if (k > 0.0 && k < 1.0) breaks.push_back(k);
    }
    return {[samples](double x) { return samples(x); }, std::move(breaks), std::move(label)};
}

}  // namespace flatctl
