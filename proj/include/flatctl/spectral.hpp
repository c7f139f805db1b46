#pragma once

// Eigen-machinery of the degenerate operator A f = -(x^alpha f')' on (0, 1)
// with weighted zero flux at 0 and Dirichlet data at 1:
//
//   phi_k(x) = b_k x^{(1-alpha)/2} J_nu(j_k x^{1-alpha/2}),
//   lambda_k = (1 - alpha/2)^2 j_k^2,  b_k = sqrt(2-alpha) / |J_{nu+1}(j_k)|,
//
// with nu = (alpha-1)/(2-alpha). All inner products are computed in the
// variable y = x^{1-alpha/2}, in which the integrands are smooth.

#include <vector>

#include "flatctl/initial_datum.hpp"
#include "flatctl/specfun.hpp"

namespace flatctl::spectral {

/// Largest admissible alpha is 2 - kAlphaMargin.
inline constexpr double kAlphaMargin = 1e-3;
/// Y^(n) is only evaluated for t >= kMinTimeFraction * T.
inline constexpr double kMinTimeFraction = 1e-4;
/// Default mode count makes lambda_K * tau at least this large.
inline constexpr double kDefaultDecayExponent = 60.0;
/// Relative tail above which flat_output_derivs flags a precision warning.
inline constexpr double kTailWarning = 1e-10;

class ModelParams {
public:
    /// tau defaults to T/3, s to 1.5 (see make_default).
    ModelParams(double alpha, double horizon, double tau, double s);
    static ModelParams make_default(double alpha, double horizon);

    double alpha() const noexcept { return alpha_; }
    double nu() const noexcept { return (alpha_ - 1.0) / (2.0 - alpha_); }
    double horizon() const noexcept { return horizon_; }
    double tau() const noexcept { return tau_; }
    double gevrey() const noexcept { return s_; }

private:
    double alpha_;
    double horizon_;
    double tau_;
    double s_;
};

class EigenBasis {
public:
    EigenBasis(ModelParams params, specfun::ZeroTable zeros);

    const ModelParams& params() const noexcept { return params_; }
    const specfun::ZeroTable& zeros() const noexcept { return zeros_; }
    int size() const noexcept { return zeros_.count(); }
    /// 1-based accessors.
    double zero(int k) const { return zeros_.zero(k); }
    double lambda(int k) const;
    double norm_factor(int k) const;
    const std::vector<double>& lambdas() const noexcept { return lambdas_; }

private:
    ModelParams params_;
    specfun::ZeroTable zeros_;
    std::vector<double> lambdas_;
    std::vector<double> norm_factors_;
};

EigenBasis build_basis(const ModelParams& params, int mode_count);

/// Smallest K with lambda_K * tau >= kDefaultDecayExponent.
int default_mode_count(const ModelParams& params);

/// phi_k(x) for 0 <= x <= 1 (the x = 0 value is the finite limit).
double eigenfunction(const EigenBasis& basis, int k, double x);
/// The weighted flux x^alpha phi_k'(x), 0 <= x <= 1.
double eigenfunction_flux(const EigenBasis& basis, int k, double x);
/// phi_k'(x) for 0 < x <= 1.
double eigenfunction_derivative(const EigenBasis& basis, int k, double x);

/// sum_k weights[k-1] phi_k as an initial datum. The basis is copied.
InitialDatum eigen_datum(const EigenBasis& basis, std::vector<double> weights);

struct SpectralCoeffs {
    std::vector<double> a;
    double f0_norm = 0.0;
};

/// Tolerance for successive panel refinements in project().
inline constexpr double kProjectionTolerance = 1e-10;

/// a_k = int_0^1 f0 phi_k dx and ||f0||. Panels are doubled until two
/// successive refinements agree to kProjectionTolerance; throws
/// ConvergenceError carrying the achieved difference otherwise.
SpectralCoeffs project(const EigenBasis& basis, const InitialDatum& f0);

struct ValueWithTail {
    double value = 0.0;
    double tail = 0.0;
};

/// sum_k e^{-lambda_k t} a_k phi_k(x); tail = e^{-lambda_K t} ||f0||.
ValueWithTail free_evolution(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t, double x);

/// ||f(t)|| = (sum a_k^2 e^{-2 lambda_k t})^{1/2}.
double free_evolution_norm(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t);

struct FlatOutputStack {
    std::vector<double> values;  // Y^(0..N)(t)
    std::vector<double> tails;   // truncation estimate per order
    bool precision_warning = false;
};

/// The constant sqrt(2-alpha) / (2^nu Gamma(nu+1)) in front of Y.
double flat_output_constant(const ModelParams& params);

/// Y^(n)(t) = (-1)^n C sum_k a_k j_k^nu / |J_{nu+1}(j_k)| lambda_k^n e^{-lambda_k t}
/// for n = 0..order and t >= kMinTimeFraction * T.
FlatOutputStack flat_output_derivs(const EigenBasis& basis, const SpectralCoeffs& coeffs, double t, int order);

}  // namespace flatctl::spectral
