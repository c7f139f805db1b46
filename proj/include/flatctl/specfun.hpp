#pragma once

// Real special functions used by the eigen-machinery: Gamma, Bessel J of
// real nonnegative order, its derivative and its positive zeros.
//
// J_nu(z) is evaluated in three regimes:
//   z <= kSeriesLimit              ascending power series (compensated)
//   kSeriesLimit < z < 25 + nu     Miller backward recurrence, normalised by
//                                  (z/2)^nu0 = sum_k (nu0+2k) Gamma(nu0+k)/k! J_{nu0+2k}
//   z >= 25 + nu                   Hankel expansion for the fractional orders
//                                  nu0, nu0+1, then forward recurrence to nu.

#include <span>
#include <vector>

namespace flatctl::specfun {

/// Ascending series is used up to this argument.
inline constexpr double kSeriesLimit = 10.0;
/// Large-argument expansion starts at kAsymptoticOffset + nu.
inline constexpr double kAsymptoticOffset = 25.0;

/// Order of a Bessel function, nu >= 0.
class BesselOrder {
public:
    explicit BesselOrder(double nu);
    double value() const noexcept { return nu_; }

private:
    double nu_;
};

/// log|Gamma(x)| for any real x that is not a non-positive integer.
/// Lanczos kernel for x >= 0.5, reflection formula below.
double log_gamma(double x);

/// Gamma(p) for 0 < p <= 171.
double gamma(double p);

/// J_nu(z) for z >= 0.
double bessel_j(BesselOrder nu, double z);

/// z^{-nu} J_nu(z), the entire even function behind J_nu; equals
/// 1 / (2^nu Gamma(nu + 1)) at z = 0.
double bessel_j_reduced(BesselOrder nu, double z);

/// dJ_nu/dz for z > 0, from 2 J_nu' = J_{nu-1} - J_{nu+1} with J_{nu-1}
/// eliminated through the three-term recurrence.
double bessel_j_prime(BesselOrder nu, double z);

/// The first positive zeros j_{nu,1} < j_{nu,2} < ... of J_nu.
class ZeroTable {
public:
    ZeroTable(BesselOrder nu, std::vector<double> zeros);

    BesselOrder order() const noexcept { return nu_; }
    int count() const noexcept { return static_cast<int>(zeros_.size()); }
    /// k-th zero, 1-based.
    double zero(int k) const;
    std::span<const double> values() const noexcept { return zeros_; }

private:
    BesselOrder nu_;
    std::vector<double> zeros_;
};

/// First `count` positive zeros of J_nu. McMahon initial guesses are refined
/// by safeguarded Newton inside sign-change brackets found by scanning past
/// the previous zero. Throws ConvergenceError if a bracket cannot be found or
/// the returned table violates monotonicity or interlacing with J_{nu+1}.
ZeroTable bessel_zeros(BesselOrder nu, int count);

/// McMahon asymptotic estimate of j_{nu,k}.
double mcmahon_guess(BesselOrder nu, int k);

}  // namespace flatctl::specfun
