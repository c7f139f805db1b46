#include "flatctl/jets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flatctl/detail/summation.hpp"
#include "flatctl/errors.hpp"

namespace flatctl::jets {

namespace {

void check_compatible(const Jet& a, const Jet& b, const char* op) {
    if (a.order() != b.order()) {
        throw MismatchError(std::string(op) + ": jet orders differ (" + std::to_string(a.order()) + " vs " +
                            std::to_string(b.order()) + ")");
    }
    const double scale = std::max({1.0, std::abs(a.center()), std::abs(b.center())});
    if (std::abs(a.center() - b.center()) > 1e-14 * scale) {
        throw MismatchError(std::string(op) + ": jet centers differ");
    }
}

std::size_t idx(int n) { return static_cast<std::size_t>(n); }

}  // namespace

Jet::Jet(double center, std::vector<double> coeffs) : center_(center), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw DomainError("Jet: at least one coefficient required");
    if (!std::isfinite(center_)) throw DomainError("Jet: non-finite center");
    for (double c : coeffs_) {
        if (!std::isfinite(c)) throw NumericalError("Jet: non-finite coefficient");
    }
}

Jet Jet::constant(double center, double value, int order) {
    std::vector<double> c(idx(order + 1), 0.0);
    c[0] = value;
    return Jet(center, std::move(c));
}

Jet Jet::variable(double center, int order) {
    std::vector<double> c(idx(order + 1), 0.0);
    c[0] = center;
    if (order >= 1) c[1] = 1.0;
    return Jet(center, std::move(c));
}

double Jet::derivative(int n) const {
    const double c = coeff(n);
    if (c == 0.0) return 0.0;
    return std::copysign(std::exp(std::lgamma(n + 1.0) + std::log(std::abs(c))), c);
}

std::vector<double> Jet::derivatives() const {
    std::vector<double> d(coeffs_.size());
    for (int n = 0; n <= order(); ++n) d[idx(n)] = derivative(n);
    return d;
}

Jet operator+(const Jet& a, const Jet& b) {
    check_compatible(a, b, "jet add");
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    for (std::size_t n = 0; n < c.size(); ++n) c[n] += b.coeffs()[n];
    return Jet(a.center(), std::move(c));
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-1.0) * b; }

Jet operator*(const Jet& a, const Jet& b) {
    check_compatible(a, b, "jet mul");
    const auto x = a.coeffs();
    const auto y = b.coeffs();
    std::vector<double> c(x.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        detail::CompensatedSum s;
        for (std::size_t i = 0; i <= n; ++i) s.add(x[i] * y[n - i]);
        c[n] = s.value();
    }
    return Jet(a.center(), std::move(c));
}

Jet operator*(double factor, const Jet& a) {
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    for (double& v : c) v *= factor;
    return Jet(a.center(), std::move(c));
}

Jet operator+(const Jet& a, double shift) {
    std::vector<double> c(a.coeffs().begin(), a.coeffs().end());
    c[0] += shift;
    return Jet(a.center(), std::move(c));
}

// (e^g)' = g' e^g  =>  n e_n = sum_{k=1}^n k g_k e_{n-k}
Jet exp(const Jet& g) {
    const auto x = g.coeffs();
    std::vector<double> e(x.size());
    e[0] = std::exp(x[0]);
    for (std::size_t n = 1; n < e.size(); ++n) {
        detail::CompensatedSum s;
        for (std::size_t k = 1; k <= n; ++k) s.add(static_cast<double>(k) * x[k] * e[n - k]);
        e[n] = s.value() / static_cast<double>(n);
    }
    return Jet(g.center(), std::move(e));
}

// g l' = g'  =>  n g_0 l_n = n g_n - sum_{k=1}^{n-1} k l_k g_{n-k}
Jet log(const Jet& g) {
    const auto x = g.coeffs();
    if (!(x[0] > 0.0)) throw DomainError("jet log: constant term must be positive");
    std::vector<double> l(x.size());
    l[0] = std::log(x[0]);
    for (std::size_t n = 1; n < l.size(); ++n) {
        detail::CompensatedSum s;
        s.add(static_cast<double>(n) * x[n]);
        for (std::size_t k = 1; k < n; ++k) s.add(-static_cast<double>(k) * l[k] * x[n - k]);
        l[n] = s.value() / (static_cast<double>(n) * x[0]);
    }
    return Jet(g.center(), std::move(l));
}

Jet reciprocal(const Jet& g) {
    const auto x = g.coeffs();
    if (x[0] == 0.0) throw SingularityError("jet reciprocal: constant term is zero");
    std::vector<double> r(x.size());
    r[0] = 1.0 / x[0];
    for (std::size_t n = 1; n < r.size(); ++n) {
        detail::CompensatedSum s;
        for (std::size_t k = 1; k <= n; ++k) s.add(x[k] * r[n - k]);
        r[n] = -s.value() / x[0];
    }
    return Jet(g.center(), std::move(r));
}

Jet pow(const Jet& g, double exponent) { return exp(exponent * log(g)); }

Jet affine_compose(const Jet& g, double scale, double shift) {
    if (scale == 0.0 || !std::isfinite(scale)) throw DomainError("affine_compose: scale must be nonzero");
    std::vector<double> c(g.coeffs().begin(), g.coeffs().end());
    double factor = 1.0;
    for (double& v : c) {
        v *= factor;
        factor *= scale;
    }
    return Jet((g.center() - shift) / scale, std::move(c));
}

namespace {

// phi_s on (0, 1/2]; the reflected half is obtained from phi(t) = 1 - phi(1 - t),
// which keeps the exponent B - A below zero and avoids cancellation.
Jet bump_left_half(double s, double t, int order) {
    const double q = 1.0 / (s - 1.0);
    const Jet tj = Jet::variable(t, order);
    const Jet one_minus = (-1.0) * tj + 1.0;
    const Jet a = (-1.0) * pow(one_minus, -q);
    const Jet b = (-1.0) * pow(tj, -q);
    return reciprocal(exp(b - a) + 1.0);
}

}  // namespace

Jet bump_jet(double s, double t, int order) {
    if (!(s > 1.0 && s < 2.0)) throw DomainError("bump_jet: Gevrey order must lie in (1, 2)");
    if (order < 0) throw DomainError("bump_jet: order must be >= 0");
    if (!std::isfinite(t)) throw DomainError("bump_jet: non-finite time");
    if (t < kBumpEndpointCutoff) return Jet::constant(t, 1.0, order);
    if (t > 1.0 - kBumpEndpointCutoff) return Jet::constant(t, 0.0, order);
    if (t <= 0.5) return bump_left_half(s, t, order);

    const Jet mirrored = bump_left_half(s, 1.0 - t, order);
    std::vector<double> c(mirrored.coeffs().begin(), mirrored.coeffs().end());
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = (n % 2 == 0) ? -c[n] : c[n];
    c[0] += 1.0;
    return Jet(t, std::move(c));
}

std::vector<double> leibniz_derivatives(const Jet& phi, std::span<const double> y_derivs) {
    const std::size_t n_terms = y_derivs.size();
    if (static_cast<std::size_t>(phi.order() + 1) != n_terms) {
        throw MismatchError("leibniz_derivatives: jet order " + std::to_string(phi.order()) + " vs " +
                            std::to_string(n_terms) + " derivative values");
    }
    // log|phi^(i)| and log|Y^(j)|, with zeros flagged by -inf.
    std::vector<double> log_phi(n_terms);
    std::vector<double> log_y(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) {
        const double c = phi.coeffs()[i];
        log_phi[i] = (c == 0.0) ? -INFINITY : std::lgamma(i + 1.0) + std::log(std::abs(c));
        if (!std::isfinite(y_derivs[i])) throw NumericalError("leibniz_derivatives: non-finite input");
        log_y[i] = (y_derivs[i] == 0.0) ? -INFINITY : std::log(std::abs(y_derivs[i]));
    }

    std::vector<double> out(n_terms);
    for (std::size_t n = 0; n < n_terms; ++n) {
        const double log_nfact = std::lgamma(n + 1.0);
        detail::CompensatedSum s;
        for (std::size_t i = 0; i <= n; ++i) {
            const double lp = log_phi[i];
            const double ly = log_y[n - i];
            if (lp == -INFINITY || ly == -INFINITY) continue;
            const double log_binom = log_nfact - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
            const bool negative = (phi.coeffs()[i] < 0.0) != (y_derivs[n - i] < 0.0);
            const double mag = std::exp(log_binom + lp + ly);
            s.add(negative ? -mag : mag);
        }
        out[n] = s.value();
        if (!std::isfinite(out[n])) throw NumericalError("leibniz_derivatives: derivative overflow");
    }
    return out;
}

}  // namespace flatctl::jets
