#include "flatctl/flatness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <boost/math/statistics/linear_regression.hpp>

#include "flatctl/detail/summation.hpp"
#include "flatctl/errors.hpp"
#include "flatctl/jets.hpp"

namespace flatctl::flatness {

namespace {

// sum_k y_k e^{k log_w - log d_k}; the k = 0 term is y_0 for every w, including w = 0.
double series_sum(std::span<const double> y, const SeriesDenominators& den, double log_w) {
    if (static_cast<int>(y.size()) != den.order() + 1) {
        throw MismatchError("flat series: " + std::to_string(y.size()) + " derivatives vs denominators of order " +
                            std::to_string(den.order()));
    }
    detail::CompensatedSum sum;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!std::isfinite(y[k])) throw NumericalError("flat series: non-finite derivative y^(" + std::to_string(k) + ")");
        if (y[k] == 0.0) continue;
        if (k == 0) {
            sum.add(y[0]);
            continue;
        }
        if (log_w == -INFINITY) break;
        const double mag = std::exp(std::log(std::abs(y[k])) + static_cast<double>(k) * log_w - den.log_d()[k]);
        sum.add(std::copysign(mag, y[k]));
    }
    return sum.value();
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

}  // namespace

SeriesDenominators::SeriesDenominators(double alpha, std::vector<double> log_d) : alpha_(alpha), log_d_(std::move(log_d)) {
    if (log_d_.empty() || log_d_[0] != 0.0) throw DomainError("SeriesDenominators: log_d[0] must be 0");
}

SeriesDenominators denominators(const spectral::ModelParams& params, int order) {
    if (order < 0) throw DomainError("denominators: order must be >= 0");
    const double nu = params.nu();
    const double log_c2 = 2.0 * std::log(2.0 - params.alpha());
    std::vector<double> log_d(static_cast<std::size_t>(order + 1));
    detail::CompensatedSum acc;
    for (int k = 1; k <= order; ++k) {
        acc.add(log_c2 + std::log(static_cast<double>(k)) + std::log(k + nu));
        log_d[static_cast<std::size_t>(k)] = acc.value();
    }
    return SeriesDenominators(params.alpha(), std::move(log_d));
}

namespace {

// max_t |y^(n)(t)| for each n, over stacks of possibly different lengths.
std::vector<double> envelope(std::span<const std::vector<double>> stacks) {
    std::vector<double> env;
    for (const auto& stack : stacks) {
        if (stack.size() > env.size()) env.resize(stack.size(), 0.0);
        for (std::size_t n = 0; n < stack.size(); ++n) env[n] = std::max(env[n], std::abs(stack[n]));
    }
    return env;
}

}  // namespace

GevreyFit fit_gevrey(std::span<const std::vector<double>> stacks, double s) {
    const auto env = envelope(stacks);
    std::vector<double> n_vals;
    std::vector<double> target;
    for (std::size_t n = 0; n < env.size(); ++n) {
        if (env[n] == 0.0) continue;
        n_vals.push_back(static_cast<double>(n));
        target.push_back(std::log(env[n]) - s * log_factorial(static_cast<int>(n)));
    }
    GevreyFit fit;
    fit.s = s;
    if (target.empty()) return fit;

    double log_m = 0.0;
    double slope = 0.0;
    if (target.size() >= 2) {
        const auto [c0, c1] = boost::math::statistics::simple_ordinary_least_squares(n_vals, target);
        log_m = c0;
        slope = c1;
    } else {
        log_m = target[0];
    }
    double worst = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double r = target[i] - (log_m + slope * n_vals[i]);
        worst = std::max(worst, r);
        sq += r * r;
    }
    fit.M = std::exp(log_m + worst);
    fit.R = std::exp(-slope);
    fit.residual = std::sqrt(sq / static_cast<double>(target.size()));
    return fit;
}

GevreyFit fit_gevrey_free(std::span<const std::vector<double>> stacks) {
    const auto env = envelope(stacks);
    std::vector<std::array<double, 3>> rows;
    std::vector<double> target;
    for (std::size_t n = 0; n < env.size(); ++n) {
        if (env[n] == 0.0) continue;
        rows.push_back({1.0, static_cast<double>(n), log_factorial(static_cast<int>(n))});
        target.push_back(std::log(env[n]));
    }
    if (rows.size() < 3) throw DomainError("fit_gevrey_free: need at least three nonzero derivatives");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        A(r, 0) = rows[i][0];
        A(r, 1) = rows[i][1];
        A(r, 2) = rows[i][2];
        b(r) = target[i];
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd resid = b - A * coef;
    GevreyFit fit;
    fit.s = coef(2);
    fit.R = std::exp(-coef(1));
    fit.M = std::exp(coef(0) + std::max(0.0, resid.maxCoeff()));
    fit.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(rows.size()));
    return fit;
}

double series_tail_bound(const GevreyFit& fit, const SeriesDenominators& den) {
    if (fit.M == 0.0) return 0.0;
    const double nu = (den.alpha() - 1.0) / (2.0 - den.alpha());
    const double log_c2 = 2.0 * std::log(2.0 - den.alpha());
    const double log_r = std::log(fit.R);
    double log_dk = den.log_d().back();
    detail::CompensatedSum sum;
    double prev = INFINITY;
    for (int k = den.order() + 1; k < den.order() + 100000; ++k) {
        log_dk += log_c2 + std::log(static_cast<double>(k)) + std::log(k + nu);
        const double log_term = std::log(fit.M) + fit.s * log_factorial(k) - k * log_r - log_dk;
        const double term = std::exp(log_term);
        sum.add(term);
        if (term < prev && term <= 1e-17 * sum.value()) break;
        prev = term;
    }
    return sum.value();
}

double log_control_derivative_bound(const GevreyFit& fit, double alpha, int n) {
    if (n < 0) throw DomainError("control_derivative_bound: n must be >= 0");
    if (fit.M == 0.0) return -INFINITY;
    const double s = fit.s;
    const double log_ratio = s * std::log(2.0) - std::log(fit.R) - 2.0 * std::log(2.0 - alpha);
    // log sum_k e^{k log_ratio - (2-s) log k!}, accumulated relative to the running maximum.
    double peak = 0.0;
    double scaled = 1.0;
    double prev = 0.0;
    for (int k = 1; k < 10000000; ++k) {
        const double log_term = k * log_ratio - (2.0 - s) * log_factorial(k);
        if (log_term > peak) {
            scaled = scaled * std::exp(peak - log_term) + 1.0;
            peak = log_term;
        } else {
            scaled += std::exp(log_term - peak);
        }
        if (log_term < prev && log_term - peak < std::log(1e-17 * scaled)) break;
        prev = log_term;
    }
    const double log_head = std::log(fit.M) + n * (s * std::log(2.0) - std::log(fit.R)) + s * log_factorial(n);
    return log_head + peak + std::log(scaled);
}

double control_derivative_bound(const GevreyFit& fit, double alpha, int n) {
    return std::exp(log_control_derivative_bound(fit, alpha, n));
}

spectral::ValueWithTail control_value(std::span<const double> y_derivs, const SeriesDenominators& den,
                                      const GevreyFit* fit) {
    return {series_sum(y_derivs, den, 0.0), fit ? series_tail_bound(*fit, den) : 0.0};
}

double solution_value(std::span<const double> y_derivs, const SeriesDenominators& den, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("solution_value: x must lie in [0, 1]");
    const double log_w = x == 0.0 ? -INFINITY : (2.0 - den.alpha()) * std::log(x);
    return series_sum(y_derivs, den, log_w);
}

ControlLaw::ControlLaw(spectral::EigenBasis basis, spectral::SpectralCoeffs coeffs, int order)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)), den_(flatness::denominators(basis_.params(), order)) {
    if (static_cast<int>(coeffs_.a.size()) != basis_.size()) throw MismatchError("ControlLaw: coefficient count");
}

ControlSample ControlLaw::sample(double t) const {
    const auto& p = basis_.params();
    if (!std::isfinite(t)) throw DomainError("ControlLaw: non-finite time");
    ControlSample out;
    if (t <= p.tau()) return out;

    const int N = order();
    const double span = p.horizon() - p.tau();
    const double r = (t - p.tau()) / span;
    const jets::Jet bump = jets::bump_jet(p.gevrey(), r, N);
    // Jet of t -> phi_s((t - tau)/(T - tau)), centred at t.
    const jets::Jet phi = jets::affine_compose(bump, 1.0 / span, -p.tau() / span);

    if (std::all_of(phi.coeffs().begin(), phi.coeffs().end(), [](double c) { return c == 0.0; })) {
        out.y.assign(static_cast<std::size_t>(N + 1), 0.0);
        out.y_tail.assign(static_cast<std::size_t>(N + 1), 0.0);
        return out;
    }

    const auto Y = spectral::flat_output_derivs(basis_, coeffs_, t, N);
    out.precision_warning = Y.precision_warning;
    out.y = jets::leibniz_derivatives(phi, Y.values);

    std::vector<double> abs_coeffs(phi.coeffs().begin(), phi.coeffs().end());
    for (double& c : abs_coeffs) c = std::abs(c);
    out.y_tail = jets::leibniz_derivatives(jets::Jet(t, std::move(abs_coeffs)), Y.tails);
    out.u = control_value(out.y, den_).value;
    return out;
}

std::optional<std::size_t> ControlSignal::index_of(double t) const {
    if (times.empty()) return std::nullopt;
    const double tol = 1e-12 * std::max(1.0, std::abs(times.back()));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) return std::nullopt;
    return static_cast<std::size_t>(it - times.begin());
}

ControlSignal assemble_control(const ControlLaw& law, std::span<const double> time_grid) {
    const auto& p = law.basis().params();
    if (time_grid.size() < 2) throw GridError("assemble_control: time grid needs at least two points");
    const double tol = 1e-12 * p.horizon();
    if (std::abs(time_grid.front()) > tol) throw GridError("assemble_control: time grid must start at 0");
    if (std::abs(time_grid.back() - p.horizon()) > tol) throw GridError("assemble_control: time grid must end at T");
    for (std::size_t i = 1; i < time_grid.size(); ++i) {
        if (!(time_grid[i] > time_grid[i - 1])) throw GridError("assemble_control: time grid must be increasing");
    }

    ControlSignal sig;
    sig.times.assign(time_grid.begin(), time_grid.end());
    if (!sig.index_of(p.tau())) throw GridError("assemble_control: time grid must contain tau");
    sig.order = law.order();
    sig.modes = law.basis().size();
    sig.u.resize(time_grid.size(), 0.0);
    sig.y_stack.resize(time_grid.size());
    sig.tail.resize(time_grid.size(), 0.0);

    std::vector<std::vector<double>> y_tails(time_grid.size());
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        // The grid point equal to tau (up to rounding) is still on the zero branch.
        if (time_grid[i] <= p.tau() + tol) continue;
        ControlSample s = law.sample(time_grid[i]);
        sig.u[i] = s.u;
        sig.precision_warning = sig.precision_warning || s.precision_warning;
        sig.y_stack[i] = std::move(s.y);
        y_tails[i] = std::move(s.y_tail);
    }

    sig.gevrey_fit = fit_gevrey(sig.y_stack, p.gevrey());
    const double series_tail = series_tail_bound(sig.gevrey_fit, law.denominators());
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        if (sig.y_stack[i].empty()) continue;
        sig.tail[i] = series_tail + std::abs(control_value(y_tails[i], law.denominators()).value);
    }
    return sig;
}

std::vector<double> control_grid(const spectral::ModelParams& params, int steps) {
    if (steps < 1) throw DomainError("control_grid: steps must be >= 1");
    const double T = params.horizon();
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(steps + 2));
    for (int i = 0; i <= steps; ++i) grid.push_back(T * static_cast<double>(i) / steps);
    grid.back() = T;
    const double tol = 1e-12 * T;
    const auto it = std::lower_bound(grid.begin(), grid.end(), params.tau() - tol);
    if (std::abs(*it - params.tau()) <= tol) {
        *it = params.tau();
    } else {
        grid.insert(it, params.tau());
    }
    return grid;
}

}  // namespace flatctl::flatness
