#include "flatctl/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "flatctl/detail/summation.hpp"
#include "flatctl/errors.hpp"

namespace flatctl::specfun {

namespace {

using detail::CompensatedSum;
using std::numbers::pi;

// Lanczos approximation, g = 671/128 with 15 coefficients. Relative accuracy
// close to machine precision for x > 0.
constexpr double kLanczosShift = 5.24218750000000000;
constexpr double kLanczosC0 = 0.999999999999997092;
constexpr std::array<double, 14> kLanczosCoeffs = {
    57.1562356658629235,     -59.5979603554754912,     14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,   .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,   -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3,  .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};
constexpr double kSqrtTwoPi = 2.5066282746310005;

double log_gamma_lanczos(double x) {
    double y = x;
    double tmp = x + kLanczosShift;
    tmp = (x + 0.5) * std::log(tmp) - tmp;
    double ser = kLanczosC0;
    for (double c : kLanczosCoeffs) {
        y += 1.0;
        ser += c / y;
    }
    return tmp + std::log(kSqrtTwoPi * ser / x);
}

// sum_n (-1)^n (z/2)^{2n} / (n! Gamma(n + nu + 1)), valid for nu > -1.
double reduced_series(double nu, double z) {
    const double q = -0.25 * z * z;
    double term = std::exp(-log_gamma(nu + 1.0));
    CompensatedSum sum;
    sum.add(term);
    // Terms stop growing once n(n + nu) exceeds |q|.
    const double peak = std::sqrt(std::abs(q)) + 1.0;
    for (int n = 1; n < 500; ++n) {
        term *= q / (n * (n + nu));
        sum.add(term);
        if (n > peak && std::abs(term) <= 1e-18 * std::abs(sum.value())) break;
        if (term == 0.0) break;
    }
    return sum.value();
}

double series_j(double nu, double z) {
    return std::pow(0.5 * z, nu) * reduced_series(nu, z);
}

struct HankelPQ {
    double p;
    double q;
};

// Large-argument expansions P(mu, z), Q(mu, z); stops at the smallest term.
HankelPQ hankel_pq(double mu, double z) {
    const double m4 = 4.0 * mu * mu;
    double term = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    CompensatedSum p;
    CompensatedSum q;
    p.add(1.0);
    for (int k = 1; k <= 80; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (m4 - odd * odd) / (8.0 * k * z);
        if (std::abs(term) > prev) break;
        switch (k % 4) {
            case 1: q.add(term); break;
            case 2: p.add(-term); break;
            case 3: q.add(-term); break;
            default: p.add(term); break;
        }
        prev = std::abs(term);
        if (prev < 1e-17 * (std::abs(p.value()) + std::abs(q.value()))) break;
    }
    return {p.value(), q.value()};
}

double hankel_j(double mu, double z) {
    const auto [p, q] = hankel_pq(mu, z);
    const double chi = z - (0.5 * mu + 0.25) * pi;
    return std::sqrt(2.0 / (pi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

// J_{nu0 + n}(z), nu0 in [0, 1), by downward recurrence.
double miller_j(double nu0, int n, double z) {
    int top = static_cast<int>(std::max<double>(n, z)) + 40;
    if (top % 2 != 0) ++top;

    std::vector<double> weights(static_cast<std::size_t>(top / 2 + 1));
    weights[0] = std::exp(log_gamma(nu0 + 1.0));
    double g = weights[0];  // Gamma(nu0 + k) / k! at k = 1
    for (int k = 1; k <= top / 2; ++k) {
        weights[static_cast<std::size_t>(k)] = (nu0 + 2.0 * k) * g;
        g *= (nu0 + k) / (k + 1.0);
    }

    constexpr double kRescale = 1e250;
    double above = 0.0;
    double cur = 1e-30;
    double captured = 0.0;
    CompensatedSum norm;
    for (int m = top; m >= 1; --m) {
        if (m % 2 == 0) norm.add(weights[static_cast<std::size_t>(m / 2)] * cur);
        if (m == n) captured = cur;
        const double below = (2.0 * (nu0 + m) / z) * cur - above;
        above = cur;
        cur = below;
        if (std::abs(cur) > kRescale) {
            cur /= kRescale;
            above /= kRescale;
            captured /= kRescale;
            norm.scale(1.0 / kRescale);
        }
    }
    norm.add(weights[0] * cur);
    if (n == 0) captured = cur;
    return captured * std::pow(0.5 * z, nu0) / norm.value();
}

double large_argument_j(double nu, double z) {
    const double whole = std::floor(nu);
    const double nu0 = nu - whole;
    const int n = static_cast<int>(whole);
    double j0 = hankel_j(nu0, z);
    if (n == 0) return j0;
    double j1 = hankel_j(nu0 + 1.0, z);
    for (int m = 1; m < n; ++m) {
        const double j2 = (2.0 * (nu0 + m) / z) * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    return j1;
}

void check_argument(double z, const char* what) {
    if (!std::isfinite(z) || z < 0.0) {
        throw DomainError(std::string(what) + ": argument must be finite and nonnegative, got " +
                          std::to_string(z));
    }
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double refine_zero(const BesselOrder& nu, double a, double b, double fa, double guess) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double x = (guess > a && guess < b) ? guess : 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double fx = bessel_j(nu, x);
        if (fx == 0.0) return x;
        if (sign_of(fx) == sign_of(fa)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const double dfx = bessel_j_prime(nu, x);
        double next = (dfx != 0.0) ? x - fx / dfx : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - x) <= 4.0 * eps * std::abs(next)) return next;
        x = next;
        if (b - a <= 4.0 * eps * b) return 0.5 * (a + b);
    }
    throw ConvergenceError("bessel_zeros: Newton/bisection did not converge in bracket [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
}

}  // namespace

BesselOrder::BesselOrder(double nu) : nu_(nu) {
    if (!std::isfinite(nu) || nu < 0.0) {
        throw DomainError("Bessel order must be finite and nonnegative, got " + std::to_string(nu));
    }
}

double log_gamma(double x) {
    if (!std::isfinite(x)) throw DomainError("log_gamma: non-finite argument");
    if (x <= 0.0 && x == std::floor(x)) {
        throw DomainError("log_gamma: pole at non-positive integer " + std::to_string(x));
    }
    if (x >= 0.5) return log_gamma_lanczos(x);
    // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    return std::log(pi / std::abs(std::sin(pi * x))) - log_gamma_lanczos(1.0 - x);
}

double gamma(double p) {
    if (!std::isfinite(p) || p <= 0.0) {
        throw DomainError("gamma: argument must be positive and finite, got " + std::to_string(p));
    }
    if (p > 171.0) throw DomainError("gamma: argument overflows double, got " + std::to_string(p));
    return std::exp(log_gamma(p));
}

double bessel_j(BesselOrder order, double z) {
    check_argument(z, "bessel_j");
    const double nu = order.value();
    if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (z <= kSeriesLimit) return series_j(nu, z);
    if (z >= kAsymptoticOffset + nu) return large_argument_j(nu, z);
    const double whole = std::floor(nu);
    return miller_j(nu - whole, static_cast<int>(whole), z);
}

double bessel_j_reduced(BesselOrder order, double z) {
    check_argument(z, "bessel_j_reduced");
    const double nu = order.value();
    if (z <= kSeriesLimit) return std::exp2(-nu) * reduced_series(nu, z);
    return bessel_j(order, z) * std::exp(-nu * std::log(z));
}

double bessel_j_prime(BesselOrder order, double z) {
    if (!std::isfinite(z) || z <= 0.0) {
        throw DomainError("bessel_j_prime: argument must be positive, got " + std::to_string(z));
    }
    const double nu = order.value();
    const double next = bessel_j(BesselOrder(nu + 1.0), z);
    if (nu == 0.0) return -next;
    return (nu / z) * bessel_j(order, z) - next;
}

ZeroTable::ZeroTable(BesselOrder nu, std::vector<double> zeros) : nu_(nu), zeros_(std::move(zeros)) {
    if (zeros_.empty()) throw DomainError("ZeroTable: empty");
}

double ZeroTable::zero(int k) const {
    if (k < 1 || k > count()) {
        throw DomainError("ZeroTable: index " + std::to_string(k) + " outside 1.." + std::to_string(count()));
    }
    return zeros_[static_cast<std::size_t>(k - 1)];
}

double mcmahon_guess(BesselOrder nu, int k) {
    const double mu = 4.0 * nu.value() * nu.value();
    const double beta = (k + 0.5 * nu.value() - 0.25) * pi;
    const double b8 = 8.0 * beta;
    return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
}

ZeroTable bessel_zeros(BesselOrder nu, int count) {
    if (count < 1) throw DomainError("bessel_zeros: count must be >= 1");
    constexpr double kStep = pi / 4.0;
    // Consecutive zeros are more than 3 apart for nu >= 0, so a scan restarted
    // half a unit past the previous zero meets exactly one sign change per zero.
    constexpr double kRestart = 0.5;

    std::vector<double> zeros;
    zeros.reserve(static_cast<std::size_t>(count));
    double a = nu.value() + kRestart;
    for (int k = 1; k <= count; ++k) {
        double fa = bessel_j(nu, a);
        double b = a + kStep;
        double fb = bessel_j(nu, b);
        int steps = 0;
        while (sign_of(fa) == sign_of(fb)) {
            a = b;
            fa = fb;
            b += kStep;
            fb = bessel_j(nu, b);
            if (++steps > 64) {
                throw ConvergenceError("bessel_zeros: no sign change found for zero " + std::to_string(k) +
                                       " of order " + std::to_string(nu.value()));
            }
        }
        const double root = (fb == 0.0) ? b : refine_zero(nu, a, b, fa, mcmahon_guess(nu, k));
        zeros.push_back(root);
        a = root + kRestart;
    }

    const BesselOrder next(nu.value() + 1.0);
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        const double z = zeros[i];
        if (std::abs(bessel_j(nu, z)) > 1e-11) {
            throw ConvergenceError("bessel_zeros: residual too large at zero " + std::to_string(i + 1),
                                   std::abs(bessel_j(nu, z)));
        }
        if (i == 0 ? !(z > nu.value()) : !(z > zeros[i - 1])) {
            throw ConvergenceError("bessel_zeros: zeros not strictly increasing above the order");
        }
        // J_{nu+1} has exactly one zero between consecutive zeros of J_nu.
        const int expected = (i % 2 == 0) ? 1 : -1;
        if (sign_of(bessel_j(next, z)) != expected) {
            throw ConvergenceError("bessel_zeros: interlacing with J_{nu+1} violated at zero " +
                                   std::to_string(i + 1));
        }
    }
    return ZeroTable(nu, std::move(zeros));
}

}  // namespace flatctl::specfun
