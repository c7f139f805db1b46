#include "flatctl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "flatctl/detail/quadrature.hpp"
#include "flatctl/detail/summation.hpp"
#include "flatctl/errors.hpp"

namespace flatctl::spectral {

namespace {

std::size_t idx(int k) { return static_cast<std::size_t>(k - 1); }

void check_mode(const EigenBasis& basis, int k) {
    if (k < 1 || k > basis.size()) {
        throw DomainError("mode index " + std::to_string(k) + " outside 1.." + std::to_string(basis.size()));
    }
}

void check_point(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("point must lie in [0, 1], got " + std::to_string(x));
}

// y = x^{1 - alpha/2}
double to_y(const ModelParams& p, double x) { return std::pow(x, 1.0 - 0.5 * p.alpha()); }

double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

ModelParams::ModelParams(double alpha, double horizon, double tau, double s)
    : alpha_(alpha), horizon_(horizon), tau_(tau), s_(s) {
    if (!(alpha >= 1.0 && alpha <= 2.0 - kAlphaMargin)) {
        throw DomainError("alpha must lie in [1, " + std::to_string(2.0 - kAlphaMargin) + "], got " +
                          std::to_string(alpha));
    }
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw DomainError("horizon T must be positive");
    if (!(tau > 0.0 && tau < horizon)) throw DomainError("tau must lie in (0, T)");
    if (!(s > 1.0 && s < 2.0)) throw DomainError("Gevrey order s must lie in (1, 2)");
}

ModelParams ModelParams::make_default(double alpha, double horizon) {
    return ModelParams(alpha, horizon, horizon / 3.0, 1.5);
}

EigenBasis::EigenBasis(ModelParams params, specfun::ZeroTable zeros) : params_(params), zeros_(std::move(zeros)) {
    if (std::abs(zeros_.order().value() - params_.nu()) > 1e-12 * std::max(1.0, params_.nu())) {
        throw MismatchError("EigenBasis: zero table order does not match nu(alpha)");
    }
    const double c = 1.0 - 0.5 * params_.alpha();
    const specfun::BesselOrder next(params_.nu() + 1.0);
    const double root = std::sqrt(2.0 - params_.alpha());
    for (double j : zeros_.values()) {
        lambdas_.push_back(c * c * j * j);
        norm_factors_.push_back(root / std::abs(specfun::bessel_j(next, j)));
    }
}

double EigenBasis::lambda(int k) const {
    check_mode(*this, k);
    return lambdas_[idx(k)];
}

double EigenBasis::norm_factor(int k) const {
    check_mode(*this, k);
    return norm_factors_[idx(k)];
}

EigenBasis build_basis(const ModelParams& params, int mode_count) {
    if (mode_count < 1) throw DomainError("build_basis: mode count must be >= 1");
    return EigenBasis(params, specfun::bessel_zeros(specfun::BesselOrder(params.nu()), mode_count));
}

int default_mode_count(const ModelParams& params) {
    const double c = 1.0 - 0.5 * params.alpha();
    const double target = std::sqrt(kDefaultDecayExponent / params.tau()) / c;
    const specfun::BesselOrder nu(params.nu());
    int guess = 1;
    while (specfun::mcmahon_guess(nu, guess) < target) ++guess;
    for (int count = guess + 4;; count *= 2) {
        const auto zeros = specfun::bessel_zeros(nu, count);
        for (int k = 1; k <= count; ++k) {
            if (zeros.zero(k) >= target) return k;
        }
    }
}

double eigenfunction(const EigenBasis& basis, int k, double x) {
    check_mode(basis, k);
    check_point(x);
    const double nu = basis.params().nu();
    const double j = basis.zero(k);
    const double reduced = specfun::bessel_j_reduced(specfun::BesselOrder(nu), j * to_y(basis.params(), x));
    return basis.norm_factor(k) * std::pow(j, nu) * reduced;
}

// x^alpha phi_k' = -b_k (1 - alpha/2) j^{nu+2} x (jy)^{-nu-1} J_{nu+1}(jy)
double eigenfunction_flux(const EigenBasis& basis, int k, double x) {
    check_mode(basis, k);
    check_point(x);
    const double nu = basis.params().nu();
    const double j = basis.zero(k);
    const double c = 1.0 - 0.5 * basis.params().alpha();
    const double reduced = specfun::bessel_j_reduced(specfun::BesselOrder(nu + 1.0), j * to_y(basis.params(), x));
    return -basis.norm_factor(k) * c * std::pow(j, nu + 2.0) * x * reduced;
}

double eigenfunction_derivative(const EigenBasis& basis, int k, double x) {
    if (!(x > 0.0)) throw DomainError("eigenfunction_derivative: x must be positive");
    return eigenfunction_flux(basis, k, x) * std::pow(x, -basis.params().alpha());
}

InitialDatum eigen_datum(const EigenBasis& basis, std::vector<double> weights) {
    if (weights.empty()) throw ConfigError("eigen_datum: no weights");
    if (static_cast<int>(weights.size()) > basis.size()) {
        throw ConfigError("eigen_datum: mode " + std::to_string(weights.size()) + " exceeds basis size " +
                          std::to_string(basis.size()));
    }
    std::string label = "eig";
    for (double w : weights) label += " " + std::to_string(w);
    auto f = [basis, w = std::move(weights)](double x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] != 0.0) acc += w[i] * eigenfunction(basis, static_cast<int>(i) + 1, x);
        }
        return acc;
    };
    return {std::move(f), {}, std::move(label)};
}

namespace {

struct Projection {
    std::vector<double> a;
    double norm_sq = 0.0;
};

// int_0^1 g(x) h(x) dx = int_0^1 g(y^p) h(y^p) p y^{p-1} dy with p = 2/(2-alpha),
// and p y^{p-1} phi_k(y^p) = p b_k y^{nu+1} J_nu(j_k y).
Projection project_with(const EigenBasis& basis, const InitialDatum& f0, const detail::QuadratureRule& rule) {
    const double alpha = basis.params().alpha();
    const double nu = basis.params().nu();
    const double p = 2.0 / (2.0 - alpha);
    const specfun::BesselOrder order(nu);
    const int K = basis.size();

    std::vector<detail::CompensatedSum> acc(static_cast<std::size_t>(K));
    detail::CompensatedSum norm;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double y = rule.nodes[i];
        const double fx = f0(std::pow(y, p));
        if (!std::isfinite(fx)) throw NumericalError("project: initial datum is not finite at x = " +
                                                     std::to_string(std::pow(y, p)));
        const double wy = rule.weights[i] * p * fx;
        norm.add(wy * fx * std::pow(y, p - 1.0));
        if (fx == 0.0) continue;
        const double ypow = std::pow(y, nu + 1.0);
        for (int k = 1; k <= K; ++k) {
            acc[idx(k)].add(wy * basis.norm_factor(k) * ypow * specfun::bessel_j(order, basis.zero(k) * y));
        }
    }
    Projection out;
    out.a.reserve(acc.size());
    for (const auto& s : acc) out.a.push_back(s.value());
    out.norm_sq = std::max(0.0, norm.value());
    return out;
}

}  // namespace

SpectralCoeffs project(const EigenBasis& basis, const InitialDatum& f0) {
    const double keep = 1.0 - 0.5 * basis.params().alpha();
    std::vector<double> breaks{0.0};
    for (double b : f0.breakpoints) {
        const double y = std::pow(b, keep);
        if (y > breaks.back() && y < 1.0) breaks.push_back(y);
    }
    breaks.push_back(1.0);

    // About one oscillation of the highest mode per panel.
    const double density = std::max(2.0, basis.zero(basis.size()) / (2.0 * std::numbers::pi) + 1.0);
    std::vector<int> panels;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        panels.push_back(std::max(1, static_cast<int>(std::ceil(density * (breaks[i + 1] - breaks[i])))));
    }

    constexpr int kMaxDoublings = 10;
    Projection prev = project_with(basis, f0, detail::composite_gauss(breaks, panels));
    double diff = INFINITY;
    for (int level = 0; level < kMaxDoublings; ++level) {
        for (int& n : panels) n *= 2;
        Projection next = project_with(basis, f0, detail::composite_gauss(breaks, panels));
        diff = std::abs(std::sqrt(next.norm_sq) - std::sqrt(prev.norm_sq));
        for (std::size_t k = 0; k < next.a.size(); ++k) diff = std::max(diff, std::abs(next.a[k] - prev.a[k]));
        prev = std::move(next);
        if (diff <= kProjectionTolerance) return {std::move(prev.a), std::sqrt(prev.norm_sq)};
    }
    throw ConvergenceError("project: quadrature refinements still differ by " + std::to_string(diff), diff);
}

ValueWithTail free_evolution(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t, double x) {
    if (!(t >= 0.0)) throw DomainError("free_evolution: t must be >= 0");
    if (static_cast<int>(coeffs.a.size()) != basis.size()) throw MismatchError("free_evolution: coefficient count");
    detail::CompensatedSum sum;
    for (int k = 1; k <= basis.size(); ++k) {
        const double a = coeffs.a[idx(k)];
        if (a == 0.0) continue;
        sum.add(std::exp(-basis.lambda(k) * t) * a * eigenfunction(basis, k, x));
    }
    return {sum.value(), std::exp(-basis.lambda(basis.size()) * t) * coeffs.f0_norm};
}

double free_evolution_norm(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t) {
    if (static_cast<int>(coeffs.a.size()) != basis.size()) throw MismatchError("free_evolution_norm: coefficient count");
    detail::CompensatedSum sum;
    for (int k = 1; k <= basis.size(); ++k) {
        const double v = coeffs.a[idx(k)] * std::exp(-basis.lambda(k) * t);
        sum.add(v * v);
    }
    return std::sqrt(sum.value());
}

double flat_output_constant(const ModelParams& params) {
    const double nu = params.nu();
    return std::sqrt(2.0 - params.alpha()) * std::exp(-nu * std::numbers::ln2 - specfun::log_gamma(nu + 1.0));
}

namespace {

// Bound on C ||f0|| sum_{k>K} j_k^nu / |J_{nu+1}(j_k)| lambda_k^n e^{-lambda_k t}, in log form.
// With |J_{nu+1}(j)| >= sqrt(2/(pi j)) / 1.1 and lambda = c^2 j^2 the summand is
// g(j) = 1.1 sqrt(pi/2) j^{nu+1/2} (c j)^{2n} e^{-c^2 t j^2}; for unimodal g,
// sum_{k>K} g(j_k) <= (1/gap) int_{j_K}^inf g dj + max g, and the integral is
// (1/2) c^{2n} (c^2 t)^{-a} Gamma(a, lambda_K t) with a = n + nu/2 + 3/4.
double log_tail_bound(const EigenBasis& basis, double log_prefactor, double t, int n) {
    const double nu = basis.params().nu();
    const double c = 1.0 - 0.5 * basis.params().alpha();
    const int K = basis.size();
    const double jK = basis.zero(K);
    const double gap = K >= 2 ? std::min(std::numbers::pi, jK - basis.zero(K - 1)) : 3.0;
    const double a = n + 0.5 * nu + 0.75;
    const double vK = basis.lambda(K) * t;
    const double c2t = c * c * t;

    double log_integral = -INFINITY;
    const double q = boost::math::gamma_q(a, vK);
    if (q > 0.0) {
        log_integral = -std::numbers::ln2 + 2.0 * n * std::log(c) - a * std::log(c2t) + std::lgamma(a) + std::log(q);
    }
    const double j_peak = std::sqrt((a - 0.5) / c2t);
    const double j_max = std::max(jK, j_peak);
    const double log_gmax = (nu + 0.5 + 2.0 * n) * std::log(j_max) + 2.0 * n * std::log(c) - c2t * j_max * j_max;
    const double log_sum = log_add(log_integral - std::log(gap), log_gmax);
    return log_prefactor + std::log(1.1 * std::sqrt(0.5 * std::numbers::pi)) + log_sum;
}

}  // namespace

FlatOutputStack flat_output_derivs(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t, int order) {
    const ModelParams& params = basis.params();
    if (order < 0) throw DomainError("flat_output_derivs: order must be >= 0");
    if (!(t >= kMinTimeFraction * params.horizon())) {
        throw DomainError("flat_output_derivs: t = " + std::to_string(t) + " below t_min = " +
                          std::to_string(kMinTimeFraction * params.horizon()));
    }
    if (static_cast<int>(coeffs.a.size()) != basis.size()) throw MismatchError("flat_output_derivs: coefficient count");

    const double nu = params.nu();
    const double log_c = std::log(flat_output_constant(params));
    const double log_jnext_scale = -0.5 * std::log(2.0 - params.alpha());
    const int K = basis.size();

    // log of |C a_k j_k^nu / J_{nu+1}(j_k)| e^{-lambda_k t}, using |J_{nu+1}| = sqrt(2-alpha)/b_k.
    std::vector<double> log_base(static_cast<std::size_t>(K));
    std::vector<double> log_lambda(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        const double a = coeffs.a[idx(k)];
        log_lambda[idx(k)] = std::log(basis.lambda(k));
        log_base[idx(k)] = (a == 0.0) ? -INFINITY
                                      : log_c + std::log(std::abs(a)) + nu * std::log(basis.zero(k)) +
                                            std::log(basis.norm_factor(k)) + log_jnext_scale - basis.lambda(k) * t;
    }

    FlatOutputStack out;
    out.values.resize(static_cast<std::size_t>(order + 1));
    out.tails.resize(static_cast<std::size_t>(order + 1));
    const double log_tail_prefactor = coeffs.f0_norm > 0.0 ? log_c + std::log(coeffs.f0_norm) : -INFINITY;
    for (int n = 0; n <= order; ++n) {
        detail::CompensatedSum sum;
        for (int k = 1; k <= K; ++k) {
            const double lb = log_base[idx(k)];
            if (lb == -INFINITY) continue;
            const double mag = std::exp(lb + n * log_lambda[idx(k)]);
            const bool negative = (coeffs.a[idx(k)] < 0.0) != (n % 2 == 1);
            sum.add(negative ? -mag : mag);
        }
        const double value = sum.value();
        if (!std::isfinite(value)) throw NumericalError("flat_output_derivs: Y^(" + std::to_string(n) + ") overflows");
        const std::size_t i = static_cast<std::size_t>(n);
        out.values[i] = value;
        out.tails[i] = log_tail_prefactor == -INFINITY ? 0.0 : std::exp(log_tail_bound(basis, log_tail_prefactor, t, n));
        if (out.tails[i] > kTailWarning * std::abs(value)) out.precision_warning = true;
    }
    return out;
}

}  // namespace flatctl::spectral
