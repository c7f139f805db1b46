#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "flatctl/errors.hpp"
#include "flatctl/specfun.hpp"
#include "oracles.hpp"

using namespace flatctl;
using namespace flatctl::specfun;
using std::numbers::pi;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_SUITE("gamma") {
    TEST_CASE("small integers and one half") {
        CHECK(flatctl::specfun::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(flatctl::specfun::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-13));

        boost::math::quadrature::exp_sinh<double> integrator;
        // Gamma(1/2) = int_0^inf t^{-1/2} e^{-t} dt = 2 int_0^inf e^{-u^2} du
        const double quad = integrator.integrate([](double u) { return 2.0 * std::exp(-u * u); }, 0.0,
                                                 std::numeric_limits<double>::infinity());
        CHECK(rel(flatctl::specfun::gamma(0.5), quad) < 1e-12);
        CHECK(std::abs(flatctl::specfun::gamma(0.5) - 1.7724538509) < 1e-10);
    }

    TEST_CASE("relative accuracy against Boost over (0, 170]") {
        double worst = 0.0;
        for (double p = 0.01; p <= 170.0; p += 0.37) worst = std::max(worst, rel(flatctl::specfun::gamma(p), boost::math::tgamma(p)));
        for (double p : {1e-6, 0.5, 1.5, 10.0, 100.5, 170.0}) worst = std::max(worst, rel(flatctl::specfun::gamma(p), boost::math::tgamma(p)));
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("rejects non-positive and non-finite arguments") {
        CHECK_THROWS_AS(flatctl::specfun::gamma(0.0), DomainError);
        CHECK_THROWS_AS(flatctl::specfun::gamma(-1.5), DomainError);
        CHECK_THROWS_AS(flatctl::specfun::gamma(std::nan("")), DomainError);
        CHECK_THROWS_AS(flatctl::specfun::gamma(INFINITY), DomainError);
        CHECK_THROWS_AS(log_gamma(-2.0), DomainError);
    }

    TEST_CASE("log_gamma reflection for negative non-integers") {
        for (double x : {-0.5, -1.5, -2.25, -7.9}) CHECK(rel(log_gamma(x), boost::math::lgamma(x)) < 1e-12);
    }

    TEST_CASE("recurrence Gamma(x+1) = x Gamma(x)") {
        double worst = 0.0;
        for (int m = 1; m <= 500; ++m) {
            const double x = 0.1 * m;
            const double g1 = flatctl::specfun::gamma(x + 1.0);
            worst = std::max(worst, std::abs(g1 - x * flatctl::specfun::gamma(x)) / g1);
        }
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("Stirling ratio at x = 50") {
        const double x = 50.0;
        for (auto [a, b] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}}) {
            const double ax = a * x;
            const double log_stirling = 0.5 * std::log(2.0 * pi) - ax + (ax + b - 0.5) * std::log(ax);
            const double ratio = std::exp(log_gamma(ax + b) - log_stirling);
            CHECK(std::abs(ratio - 1.0) < 0.01);
        }
    }

    TEST_CASE("factorial bound (n+k)! <= 2^(n+k) n! k! in exact arithmetic") {
        using boost::multiprecision::cpp_int;
        std::vector<cpp_int> fact(61);
        fact[0] = 1;
        for (int i = 1; i <= 60; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;
        for (int n = 0; n <= 30; ++n) {
            for (int k = 0; k <= 30; ++k) {
                const cpp_int lhs = fact[static_cast<std::size_t>(n + k)];
                const cpp_int rhs = (cpp_int(1) << (n + k)) * fact[static_cast<std::size_t>(n)] * fact[static_cast<std::size_t>(k)];
                CHECK(lhs <= rhs);
            }
        }
    }
}

TEST_SUITE("bessel_j") {
    TEST_CASE("values at the origin") {
        CHECK(bessel_j(BesselOrder(0.0), 0.0) == 1.0);
        CHECK(bessel_j(BesselOrder(2.0), 0.0) == 0.0);
        CHECK(bessel_j_reduced(BesselOrder(1.0), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    }

    TEST_CASE("first zero of J0") {
        CHECK(std::abs(bessel_j(BesselOrder(0.0), 2.404825557695773)) <= 1e-10);
    }

    TEST_CASE("absolute error against Boost up to z = 1000") {
        const std::vector<double> orders{0.0, 0.3, 0.5, 1.0, 2.0, 3.0, 8.999999999999998, 9.0, 10.5};
        double worst = 0.0;
        for (double nu : orders) {
            for (double z = 0.05; z <= 1000.0; z *= 1.03) {
                worst = std::max(worst, std::abs(bessel_j(BesselOrder(nu), z) - boost::math::cyl_bessel_j(nu, z)));
            }
            // Both sides of each regime switch.
            for (double z : {kSeriesLimit, std::nextafter(kSeriesLimit, 20.0), kAsymptoticOffset + nu,
                             std::nextafter(kAsymptoticOffset + nu, 0.0)}) {
                worst = std::max(worst, std::abs(bessel_j(BesselOrder(nu), z) - boost::math::cyl_bessel_j(nu, z)));
            }
        }
        CHECK(worst <= 1e-11);
    }

    TEST_CASE("reduced form matches z^-nu J_nu") {
        for (double nu : {0.0, 1.0, 9.0}) {
            for (double z : {0.5, 5.0, 15.0, 60.0}) {
                const double expect = boost::math::cyl_bessel_j(nu, z) * std::pow(z, -nu);
                CHECK(std::abs(bessel_j_reduced(BesselOrder(nu), z) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
            }
        }
    }

    TEST_CASE("rejects negative arguments and orders") {
        CHECK_THROWS_AS(bessel_j(BesselOrder(0.0), -1.0), DomainError);
        CHECK_THROWS_AS(BesselOrder(-0.5), DomainError);
        CHECK_THROWS_AS(bessel_j(BesselOrder(0.0), INFINITY), DomainError);
    }
}

TEST_SUITE("bessel_j_prime") {
    TEST_CASE("J0'(0+) vanishes") { CHECK(std::abs(bessel_j_prime(BesselOrder(0.0), 1e-8)) <= 1e-7); }

    TEST_CASE("J0' at its first zero") {
        const double z = 2.404825557695773;
        const double fd = oracle::derivative([](double x) { return bessel_j(BesselOrder(0.0), x); }, z, 1e-3);
        CHECK(std::abs(bessel_j_prime(BesselOrder(0.0), z) - fd) < 1e-9);
        CHECK(std::abs(bessel_j_prime(BesselOrder(0.0), z) - (-0.5191474973)) < 1e-9);
    }

    TEST_CASE("matches finite differences on [0.5, 100]") {
        double worst = 0.0;
        for (double nu : {0.0, 0.4, 1.0, 2.5, 9.0}) {
            const BesselOrder order(nu);
            for (double z = 0.5; z <= 100.0; z *= 1.07) {
                const double exact = bessel_j_prime(order, z);
                const double fd = oracle::derivative([&](double x) { return bessel_j(order, x); }, z, 1e-3);
                const double scale = std::max(std::abs(exact), 1e-3);
                worst = std::max(worst, std::abs(exact - fd) / scale);
            }
        }
        CHECK(worst <= 1e-7);
    }

    TEST_CASE("rejects non-positive arguments") {
        CHECK_THROWS_AS(bessel_j_prime(BesselOrder(1.0), 0.0), DomainError);
        CHECK_THROWS_AS(bessel_j_prime(BesselOrder(1.0), -2.0), DomainError);
    }
}

namespace {

// z^2 J'' + z J' + (z^2 - nu^2) J with J'' = d/dz [(nu/z) J_nu - J_{nu+1}].
double ode_residual(double nu, double z) {
    const BesselOrder order(nu);
    const double j = bessel_j(order, z);
    const double jp = bessel_j_prime(order, z);
    const double jpp = -(nu / (z * z)) * j + (nu / z) * jp - bessel_j_prime(BesselOrder(nu + 1.0), z);
    return z * z * jpp + z * jp + (z * z - nu * nu) * j;
}

}  // namespace

TEST_SUITE("bessel ODE") {
    TEST_CASE("residual at nu = 1, z = 3") { CHECK(std::abs(ode_residual(1.0, 3.0)) <= 1e-9); }

    TEST_CASE("residual on a log grid over [0.1, 500]") {
        double worst = 0.0;
        for (double nu : {0.0, 0.5, 1.0, 2.0, 3.0}) {
            for (double z = 0.1; z <= 500.0; z *= 1.05) worst = std::max(worst, std::abs(ode_residual(nu, z)));
        }
        CHECK(worst <= 1e-9);
    }

    TEST_CASE("derivative identity uses the difference of neighbouring orders") {
        // 2 J' = J_{nu-1} - J_{nu+1} satisfies the ODE; the sum J_{nu-1} + J_{nu+1}
        // does not. Orders 0..4 keep every term at nonnegative order.
        const double nu = 2.0;
        const double z = 3.0;
        auto J = [&](double m) { return bessel_j(BesselOrder(m), z); };
        auto residual = [&](double sign) {
            const double d1 = 0.5 * (J(nu - 1) + sign * J(nu + 1));
            const double d2 = 0.25 * (J(nu - 2) + 2.0 * sign * J(nu) + J(nu + 2));
            return z * z * d2 + z * d1 + (z * z - nu * nu) * J(nu);
        };
        CHECK(std::abs(residual(-1.0)) <= 1e-12);
        CHECK(std::abs(residual(+1.0)) > 1.0);
        CHECK(std::abs(bessel_j_prime(BesselOrder(nu), z) - 0.5 * (J(nu - 1) - J(nu + 1))) <= 1e-14);
    }
}

TEST_SUITE("bessel_zeros") {
    TEST_CASE("first three zeros of J0 against bisection on the series") {
        const auto table = bessel_zeros(BesselOrder(0.0), 3);
        const std::vector<std::pair<double, double>> brackets{{2.0, 3.0}, {5.0, 6.0}, {8.0, 9.0}};
        for (int k = 1; k <= 3; ++k) {
            const auto [a, b] = brackets[static_cast<std::size_t>(k - 1)];
            const double root = oracle::bisect([](long double z) { return oracle::bessel_series(0.0L, z); }, a, b);
            CHECK(std::abs(table.zero(k) - root) <= 1e-9);
        }
        CHECK(std::abs(table.zero(1) - 2.4048255577) <= 1e-9);
        CHECK(std::abs(table.zero(2) - 5.5200781103) <= 1e-9);
        CHECK(std::abs(table.zero(3) - 8.6537279129) <= 1e-9);
    }

    TEST_CASE("spacing approaches pi") {
        const auto table = bessel_zeros(BesselOrder(0.0), 101);
        CHECK(std::abs(table.zero(101) - table.zero(100) - pi) <= 1e-3);
    }

    TEST_CASE("zeros exceed the order") {
        const auto table = bessel_zeros(BesselOrder(2.0), 20);
        for (double z : table.values()) CHECK(z > 2.0);
    }

    TEST_CASE("monotone, interlaced with J_{nu+1}, small residual") {
        for (double nu : {0.0, 0.5, 1.0, 3.7, 8.999999999999998}) {
            const auto table = bessel_zeros(BesselOrder(nu), 60);
            double prev = nu;
            for (int k = 1; k <= table.count(); ++k) {
                const double z = table.zero(k);
                CHECK(z > prev);
                CHECK(std::abs(bessel_j(BesselOrder(nu), z)) <= 1e-11);
                CHECK(std::abs(boost::math::cyl_bessel_j(nu, z)) <= 1e-11);
                // Exactly one zero of J_{nu+1} in (j_k, j_{k+1}).
                if (k < table.count()) {
                    const double a = bessel_j(BesselOrder(nu + 1.0), z);
                    const double b = bessel_j(BesselOrder(nu + 1.0), table.zero(k + 1));
                    CHECK(a * b < 0.0);
                }
                prev = z;
            }
        }
    }

    TEST_CASE("McMahon guesses land near the zeros") {
        const auto table = bessel_zeros(BesselOrder(1.0), 40);
        for (int k = 5; k <= 40; ++k) CHECK(std::abs(mcmahon_guess(BesselOrder(1.0), k) - table.zero(k)) < 1e-3);
    }

    TEST_CASE("sqrt(j) |J_{nu+1}(j)| tends to sqrt(2/pi)") {
        for (double nu : {0.0, 1.0, 9.0}) {
            const auto table = bessel_zeros(BesselOrder(nu), 200);
            const double j = table.zero(200);
            CHECK(std::abs(std::sqrt(j) * std::abs(bessel_j(BesselOrder(nu + 1.0), j)) - std::sqrt(2.0 / pi)) <= 5e-3);
        }
    }

    TEST_CASE("orthogonality of J_nu(j_n y) with weight y") {
        for (double nu : {0.0, 1.0, 9.0}) {
            const BesselOrder order(nu);
            const auto table = bessel_zeros(order, 10);
            double worst = 0.0;
            for (int n = 1; n <= 10; ++n) {
                for (int m = n; m <= 10; ++m) {
                    const double jn = table.zero(n);
                    const double jm = table.zero(m);
                    auto f = [&](double y) { return y * bessel_j(order, jn * y) * bessel_j(order, jm * y); };
                    double integral = 0.0;
                    for (int i = 0; i < 40; ++i) {
                        integral += boost::math::quadrature::gauss<double, 30>::integrate(f, i / 40.0, (i + 1) / 40.0);
                    }
                    const double jnext = bessel_j(BesselOrder(nu + 1.0), jn);
                    const double expect = (n == m) ? 0.5 * jnext * jnext : 0.0;
                    worst = std::max(worst, std::abs(integral - expect));
                }
            }
            CHECK(worst <= 1e-9);
        }
    }

    TEST_CASE("rejects non-positive counts and bad indices") {
        CHECK_THROWS_AS(bessel_zeros(BesselOrder(0.0), 0), DomainError);
        const auto table = bessel_zeros(BesselOrder(0.0), 2);
        CHECK_THROWS_AS(table.zero(0), DomainError);
        CHECK_THROWS_AS(table.zero(3), DomainError);
    }
}
