#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "otcal/black_scholes.hpp"

using namespace otcal;

TEST_CASE("price respects no-arbitrage bounds and monotonicity") {
    double S0 = 92.0, df = std::exp(-0.025 / 3.0), T = 1.0 / 3.0;
    double prev = 0.0;
    for (double vol : {0.05, 0.2, 0.5, 0.9, 1.5}) {
        double c = bs_price(S0, 99.0, T, vol, df);
        CHECK(c > std::max(S0 - 99.0 * df, 0.0));
        CHECK(c < S0);
        CHECK(c > prev);
        prev = c;
    }
    // vol -> 0 collapses to the discounted intrinsic on the forward
    CHECK(bs_price(S0, 85.0, T, 1e-9, df) ==
          doctest::Approx(S0 - 85.0 * df).epsilon(1e-10));
}

TEST_CASE("implied_vol round-trips bs_price") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        double S0 = 50.0 + 100.0 * u(rng);
        double K = S0 * (0.85 + 0.3 * u(rng));
        double T = 0.1 + 2.0 * u(rng);
        double vol = 0.1 + 1.1 * u(rng);
        double df = std::exp(-(0.0 + 0.08 * u(rng)) * T);
        double c = bs_price(S0, K, T, vol, df);
        CHECK(implied_vol(c, S0, K, T, df) == doctest::Approx(vol).epsilon(1e-7));
    }
    CHECK_THROWS_AS(implied_vol(-0.5, 92.0, 99.0, 0.25, 1.0), std::domain_error);
    CHECK_THROWS_AS(implied_vol(95.0, 92.0, 99.0, 0.25, 1.0), std::domain_error);
}

TEST_CASE("vega matches a central difference") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        double S0 = 60.0 + 80.0 * u(rng);
        double K = S0 * (0.8 + 0.4 * u(rng));
        double T = 0.1 + 1.5 * u(rng);
        double vol = 0.1 + u(rng);
        double df = std::exp(-0.03 * T);
        double h = 1e-5;
        double fd = (bs_price(S0, K, T, vol + h, df) - bs_price(S0, K, T, vol - h, df)) / (2 * h);
        CHECK(bs_vega(S0, K, T, vol, df) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("normal cdf/pdf identities") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(norm_cdf(1.0) + norm_cdf(-1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(norm_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
    double h = 1e-6;
    CHECK((norm_cdf(0.37 + h) - norm_cdf(0.37 - h)) / (2 * h) ==
          doctest::Approx(norm_pdf(0.37)).epsilon(1e-8));
}
