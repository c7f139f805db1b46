#pragma once

// Series solution and boundary control driven by a flat output y(t):
//
//   f(t, x) = sum_k y^(k)(t) x^{(2-alpha)k} / d_k,   u(t) = f(t, 1),
//   d_k = (2-alpha)^{2k} k! prod_{j=1..k} (j + nu),
//
// with y(t) = phi_s((t - tau)/(T - tau)) Y(t) and Y the flat output of the
// free evolution.

#include <optional>
#include <span>
#include <vector>

#include "flatctl/spectral.hpp"

namespace flatctl::flatness {

class SeriesDenominators {
public:
    SeriesDenominators(double alpha, std::vector<double> log_d);

    double alpha() const noexcept { return alpha_; }
    int order() const noexcept { return static_cast<int>(log_d_.size()) - 1; }
    /// log d_k, k = 0..order().
    const std::vector<double>& log_d() const noexcept { return log_d_; }

private:
    double alpha_;
    std::vector<double> log_d_;
};

SeriesDenominators denominators(const spectral::ModelParams& params, int order);

/// |y^(n)| <= M (n!)^s / R^n.
struct GevreyFit {
    double M = 0.0;
    double R = 1.0;
    double s = 1.5;
    /// RMS residual of the log-space least-squares fit.
    double residual = 0.0;
};

/// Least-squares fit of log E_n - s log n! = log M - n log R, where E_n is the
/// largest |y^(n)| over all stacks; M is then raised so the bound holds for
/// every n. Orders with E_n = 0 are skipped; if all vanish, M = 0.
GevreyFit fit_gevrey(std::span<const std::vector<double>> stacks, double s);

/// Same with s fitted as a third parameter.
GevreyFit fit_gevrey_free(std::span<const std::vector<double>> stacks);

/// sum_{k > N} M (k!)^s R^{-k} / d_k.
double series_tail_bound(const GevreyFit& fit, const SeriesDenominators& den);

/// The Gevrey bound on |u^(n)| implied by a fit of the flat output:
/// M (2^s/R)^n (n!)^s sum_k (2^s / (R (2-alpha)^2))^k / (k!)^{2-s}.
double control_derivative_bound(const GevreyFit& fit, double alpha, int n);
/// Its logarithm, finite where the bound itself overflows.
double log_control_derivative_bound(const GevreyFit& fit, double alpha, int n);

/// sum_k y^(k) / d_k. The tail is series_tail_bound(*fit) when a fit is given.
spectral::ValueWithTail control_value(std::span<const double> y_derivs, const SeriesDenominators& den,
                                      const GevreyFit* fit = nullptr);

/// sum_k y^(k) x^{(2-alpha)k} / d_k for x in [0, 1].
double solution_value(std::span<const double> y_derivs, const SeriesDenominators& den, double x);

/// Flat-output derivatives and control at a single time.
struct ControlSample {
    std::vector<double> y;      // y^(0..N)(t); empty when t <= tau
    std::vector<double> y_tail; // bound on the modal truncation error in y^(n)
    double u = 0.0;
    bool precision_warning = false;
};

/// Evaluates y and u at arbitrary times. The basis and coefficients are copied.
class ControlLaw {
public:
    ControlLaw(spectral::EigenBasis basis, spectral::SpectralCoeffs coeffs, int order);

    const spectral::EigenBasis& basis() const noexcept { return basis_; }
    const spectral::SpectralCoeffs& coeffs() const noexcept { return coeffs_; }
    const SeriesDenominators& denominators() const noexcept { return den_; }
    int order() const noexcept { return den_.order(); }

    ControlSample sample(double t) const;
    double operator()(double t) const { return sample(t).u; }

private:
    spectral::EigenBasis basis_;
    spectral::SpectralCoeffs coeffs_;
    SeriesDenominators den_;
};

struct ControlSignal {
    std::vector<double> times;
    std::vector<double> u;
    std::vector<std::vector<double>> y_stack;
    /// Per-sample bound on |u_exact - u| from modal and series truncation.
    std::vector<double> tail;
    GevreyFit gevrey_fit;
    int order = 0;
    int modes = 0;
    bool precision_warning = false;

    /// Position of t in `times` (exact match within 1e-12 T), or nullopt.
    std::optional<std::size_t> index_of(double t) const;
};

/// Samples the control on `time_grid`, which must be increasing, start at 0,
/// end at T and contain tau. u is exactly 0 for t <= tau.
ControlSignal assemble_control(const ControlLaw& law, std::span<const double> time_grid);

/// Uniform grid on [0, T] with `steps` intervals, with tau inserted if absent.
std::vector<double> control_grid(const spectral::ModelParams& params, int steps);

}  // namespace flatctl::flatness
