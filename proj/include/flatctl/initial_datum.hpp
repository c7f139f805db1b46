#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace flatctl {

/// An initial state f0 on [0, 1]. `breakpoints` lists points in (0, 1) where
/// f0 is less smooth; quadrature panels are aligned with them.
struct InitialDatum {
    std::function<double(double)> f;
    std::vector<double> breakpoints;
    std::string label;

    double operator()(double x) const { return f(x); }
};

InitialDatum constant_datum(double c);
/// c0 + c1 x + c2 x^2 + ...
InitialDatum polynomial_datum(std::vector<double> coeffs);

/// Monotone piecewise-cubic (PCHIP) interpolant of samples (x_i, f_i) with
/// strictly increasing x_i in [0, 1]; constant extrapolation beyond the ends.
class SampledFunction {
public:
    SampledFunction(std::vector<double> x, std::vector<double> f);

    double operator()(double x) const;
    const std::vector<double>& knots() const noexcept { return x_; }

private:
    std::vector<double> x_;
    std::vector<double> f_;
    std::function<double(double)> spline_;
};

/// Reads a two-column CSV `x,f0` (header line optional).
SampledFunction read_samples_csv(const std::filesystem::path& path);

InitialDatum sampled_datum(const SampledFunction& samples, std::string label = "samples");

}  // namespace flatctl
