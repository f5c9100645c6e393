#include "doctest.h"

#include <cmath>
#include <random>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"

using namespace otcal;

TEST_CASE("smoothed payoff bounds the kink from above") {
    double K = 99.0, eps = 0.5;
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> uz(3.5, 5.5);
    for (int k = 0; k < 500; ++k) {
        double z = uz(rng);
        double raw = call_payoff(z, K);
        double sm = smoothed_call_payoff(z, K, eps);
        CHECK(sm >= raw - 1e-12);
        CHECK(sm - raw <= eps * std::log(2.0) + 1e-12);
    }
    // at the kink the gap is exactly (eps/2) log 2
    CHECK(smoothed_call_payoff(std::log(K), K, eps) ==
          doctest::Approx(0.5 * eps * std::log(2.0)).epsilon(1e-9));
    // deep in/out of the money: no cosh overflow, exact limits
    CHECK(std::abs(smoothed_call_payoff(-50.0, K, eps)) < 1e-12);
    CHECK(smoothed_call_payoff(20.0, K, eps) ==
          doctest::Approx(std::exp(20.0) - K).epsilon(1e-10));
}

TEST_CASE("flat-fit Hull-White reproduces the flat discount curve") {
    TimeGrid tg = TimeGrid::daily({60, 120});
    HullWhiteParams hw{0.4, 0.05, 0.025};
    hw.b_times = tg.nodes;
    hw.b_nodes = hw_b_flat_fit(hw.a, hw.sigma_r, hw.r0, tg.nodes);
    hw.validate();
    for (double T : {60.0 / 360.0, 120.0 / 360.0, 0.25})
        CHECK(hw.bond_price(T) == doctest::Approx(std::exp(-hw.r0 * T)).epsilon(1e-8));
    // b(0) = a r0, b grows toward a r0 + sigma_r^2/(2a)
    CHECK(hw.b(0.0) == doctest::Approx(hw.a * hw.r0).epsilon(1e-12));
    CHECK(hw.b(10.0) <= hw.a * hw.r0 + hw.sigma_r * hw.sigma_r / (2 * hw.a) + 1e-12);
}

TEST_CASE("b interpolates linearly between samples") {
    HullWhiteParams hw{0.4, 0.05, 0.025};
    hw.b_times = {0.0, 0.1, 0.2};
    hw.b_nodes = {1.0, 3.0, 2.0};
    CHECK(hw.b(0.05) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(hw.b(0.15) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(hw.b(-1.0) == doctest::Approx(1.0));
    CHECK(hw.b(5.0) == doctest::Approx(2.0));
}

TEST_CASE("CEV local variance") {
    CHECK(cev_local_variance(0.0, 0.78, 0.9) == doctest::Approx(0.78 * 0.78).epsilon(1e-14));
    double z = std::log(92.0);
    double sig = 0.78 * std::exp(z * (0.9 - 1.0));
    CHECK(cev_local_variance(z, 0.78, 0.9) == doctest::Approx(sig * sig).epsilon(1e-14));
    // gamma = 1 is log-space constant
    CHECK(cev_local_variance(4.7, 0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("reference model keeps the pole below the variance everywhere") {
    SpatialGrid2D grid(4.0, 5.0, 0.0, 5.0, 30, 30);
    double sigma_r = 0.05;
    ReferenceModel ref = ReferenceModel::cev(grid, 5, 0.9, 0.9, -0.4, sigma_r, 4.0);
    ref.validate(sigma_r);
    REQUIRE(ref.sigma_bar_sq.size() == 5);
    for (std::size_t i = 0; i < grid.n_z; ++i)
        for (std::size_t j = 0; j < grid.n_r; ++j) {
            double xi = ref.xi_ref[0](i, j);
            double s = xi * xi * sigma_r * sigma_r;
            CHECK(ref.sigma_bar_sq[0](i, j) > s);
            // xi_ref = xi_corr sigma_loc / sigma_r
            double sig_loc = 0.9 * std::exp(grid.z(i) * (0.9 - 1.0));
            CHECK(xi == doctest::Approx(-0.4 * sig_loc / sigma_r).epsilon(1e-12));
        }
}

TEST_CASE("settings validation rejects bad values") {
    CalibrationSettings s;
    CHECK_NOTHROW(s.validate());
    CalibrationSettings bad = s;
    bad.eps1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.lbfgs_memory = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    GeneratingModel gm{0.78, 0.9, -1.5, 0.5};
    CHECK_THROWS_AS(gm.validate(), std::invalid_argument);
}
