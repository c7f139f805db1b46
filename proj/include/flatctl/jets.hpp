#pragma once

// Truncated Taylor series ("jets") at a point, and the Gevrey bump built
// from them.

#include <span>
#include <vector>

namespace flatctl::jets {

/// Default truncation order for derivative stacks.
inline constexpr int kDefaultOrder = 30;

/// Truncated Taylor expansion of g at `center`: coeffs[n] = g^(n)(center) / n!.
class Jet {
public:
    Jet(double center, std::vector<double> coeffs);

    static Jet constant(double center, double value, int order);
    /// The jet of t -> t at `center`.
    static Jet variable(double center, int order);

    double center() const noexcept { return center_; }
    int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    double coeff(int n) const { return coeffs_.at(static_cast<std::size_t>(n)); }
    /// g^(n)(center) = n! * coeffs[n].
    double derivative(int n) const;
    std::vector<double> derivatives() const;

private:
    double center_;
    std::vector<double> coeffs_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
/// Cauchy product truncated at the common order.
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double factor, const Jet& a);
Jet operator+(const Jet& a, double shift);

Jet exp(const Jet& g);
/// Requires coeff(0) > 0.
Jet log(const Jet& g);
/// Requires coeff(0) != 0.
Jet reciprocal(const Jet& g);
/// g^p via exp(p * log g); requires coeff(0) > 0.
Jet pow(const Jet& g, double exponent);

/// Jet of t -> g(scale * t + shift), expanded at (g.center() - shift) / scale.
Jet affine_compose(const Jet& g, double scale, double shift);

/// Inside (0, 1) the bump is evaluated exactly; closer than this to an
/// endpoint it is replaced by the one-sided constant.
inline constexpr double kBumpEndpointCutoff = 1e-3;

/// Jet of order N at t of the Gevrey bump
///   phi_s(t) = 1 (t <= 0),  0 (t >= 1),
///   exp(-(1-t)^{-1/(s-1)}) / (exp(-(1-t)^{-1/(s-1)}) + exp(-t^{-1/(s-1)})) otherwise.
/// Requires 1 < s < 2.
Jet bump_jet(double s, double t, int order);

/// y^(n) = sum_i C(n,i) phi^(i) Y^(n-i) for n = 0..N. `phi` carries the
/// Taylor coefficients of the (already time-rescaled) bump.
std::vector<double> leibniz_derivatives(const Jet& phi, std::span<const double> y_derivs);

}  // namespace flatctl::jets
