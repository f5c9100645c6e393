#include "doctest.h"

#include <cmath>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"
#include "otcal/pricing.hpp"
#include "otcal/validate.hpp"

using namespace otcal;

namespace {

struct Setup {
    SpatialGrid2D grid{4.0, 5.0, 0.0, 5.0, 50, 50};
    TimeGrid tgrid = TimeGrid::daily({60});
    HullWhiteParams hw{0.4, 0.05, 0.025};
    GeneratingModel gen{0.78, 0.9, -0.6, 0.5};
    double z0 = std::log(92.0);
    double r0_resc = 2.5;

    Setup() {
        hw.b_times = tgrid.nodes;
        hw.b_nodes = hw_b_flat_fit(hw.a, hw.sigma_r, hw.r0, tgrid.nodes);
    }
};

} // namespace

TEST_CASE("simulation is deterministic in the seed") {
    Setup s;
    ModelSurfaces surf = ModelSurfaces::from_generating(s.grid, s.tgrid, s.gen, s.hw);
    PathBatch a = euler_simulate(surf, s.hw, s.tgrid, 400, s.z0, s.r0_resc, 99);
    PathBatch b = euler_simulate(surf, s.hw, s.tgrid, 400, s.z0, s.r0_resc, 99);
    PathBatch c = euler_simulate(surf, s.hw, s.tgrid, 400, s.z0, s.r0_resc, 100);
    REQUIRE(a.Z.size() == b.Z.size());
    double same = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < a.Z.size(); ++k)
        for (std::size_t p = 0; p < 400; ++p) {
            same = std::max(same, std::abs(a.Z[k][p] - b.Z[k][p]));
            diff = std::max(diff, std::abs(a.Z[k][p] - c.Z[k][p]));
        }
    CHECK(same == 0.0);
    CHECK(diff > 1e-3);
    // prefix property: the first paths do not depend on the batch size
    PathBatch d = euler_simulate(surf, s.hw, s.tgrid, 100, s.z0, s.r0_resc, 99);
    for (std::size_t k = 0; k < a.Z.size(); ++k)
        for (std::size_t p = 0; p < 100; ++p) CHECK(a.Z[k][p] == d.Z[k][p]);
}

TEST_CASE("frozen rate integrates the discount exactly") {
    Setup s;
    // near-zero rate noise and zero correlation: the rate pins at r0 and the
    // trapezoid discount integral is exact for a constant integrand
    s.hw.sigma_r = 1e-12;
    s.hw.b_nodes = hw_b_flat_fit(s.hw.a, s.hw.sigma_r, s.hw.r0, s.tgrid.nodes);
    GeneratingModel gen = s.gen;
    gen.xi = 0.0;
    ModelSurfaces surf = ModelSurfaces::from_generating(s.grid, s.tgrid, gen, s.hw);
    PathBatch b = euler_simulate(surf, s.hw, s.tgrid, 50, s.z0, s.r0_resc, 7);
    for (std::size_t k = 0; k < b.times.size(); ++k)
        for (std::size_t p = 0; p < 50; ++p) {
            CHECK(b.r[k][p] == doctest::Approx(s.r0_resc).epsilon(1e-8));
            CHECK(b.disc[k][p] == doctest::Approx(s.hw.r0 * b.times[k]).epsilon(1e-8));
        }
}

TEST_CASE("MC bond and forward match closed forms within 3 se") {
    Setup s;
    ModelSurfaces surf = ModelSurfaces::from_generating(s.grid, s.tgrid, s.gen, s.hw);
    PathBatch b = euler_simulate(surf, s.hw, s.tgrid, 20000, s.z0, s.r0_resc, 4242);
    double T = 60.0 / 360.0;
    McPrice bond = mc_price(b, [](double, double) { return 1.0; }, T);
    CHECK(std::abs(bond.price - s.hw.bond_price(T)) < 3.0 * std::max(bond.std_error, 1e-6));
    McPrice fwd = mc_price(b, [](double z, double) { return std::exp(z); }, T);
    CHECK(std::abs(fwd.price - 92.0) < 3.0 * fwd.std_error);
    // correlation never needs clamping on the generating model; a few percent
    // of lookups fall off the z-hull and clamp, which is expected
    CHECK(b.xi_clamped == 0);
    CHECK(b.clamp_fraction() < 0.25);
}

TEST_CASE("density estimate carries unit mass and discounts below it") {
    Setup s;
    ModelSurfaces surf = ModelSurfaces::from_generating(s.grid, s.tgrid, s.gen, s.hw);
    PathBatch b = euler_simulate(surf, s.hw, s.tgrid, 20000, s.z0, s.r0_resc, 11);
    std::size_t step = b.n_steps() / 2;
    double t = b.times[step];
    DensityEstimate de = estimate_density(b, step, s.grid);
    // paths that leave the hull are dropped, so mass_bar sits a little
    // below 1; discounting brings mass below mass_bar by the bond factor
    CHECK(de.mass_bar <= 1.0 + 1e-12);
    CHECK(de.mass_bar > 0.85);
    CHECK(de.mass < de.mass_bar);
    CHECK(de.mass / de.mass_bar == doctest::Approx(s.hw.bond_price(t)).epsilon(1e-2));
    // binning conserves the in-hull path count
    double total = 0.0;
    for (double v : de.counts.data()) total += v;
    CHECK(total <= 20000.0);
    CHECK(total == doctest::Approx(20000.0 * de.mass_bar).epsilon(0.05));
}

TEST_CASE("gaussian bump derivatives are consistent") {
    TestFunction f = gaussian_bump("b", 4.5, 2.5, 0.1, 0.8);
    double h = 1e-5;
    for (double z : {4.35, 4.5, 4.62})
        for (double r : {1.9, 2.5, 3.2}) {
            CHECK(f.dz(z, r) ==
                  doctest::Approx((f.phi(z + h, r) - f.phi(z - h, r)) / (2 * h)).epsilon(1e-5));
            CHECK(f.dr(z, r) ==
                  doctest::Approx((f.phi(z, r + h) - f.phi(z, r - h)) / (2 * h)).epsilon(1e-5));
            CHECK(f.dzz(z, r) == doctest::Approx((f.phi(z + h, r) - 2 * f.phi(z, r) +
                                                  f.phi(z - h, r)) /
                                                 (h * h))
                                     .epsilon(1e-4));
            CHECK(f.dzr(z, r) == doctest::Approx((f.phi(z + h, r + h) - f.phi(z + h, r - h) -
                                                  f.phi(z - h, r + h) + f.phi(z - h, r - h)) /
                                                 (4 * h * h))
                                     .epsilon(1e-4));
        }
}

TEST_CASE("fp residual is within its error bar on the generating model") {
    Setup s;
    ModelSurfaces surf = ModelSurfaces::from_generating(s.grid, s.tgrid, s.gen, s.hw);
    PathBatch b = euler_simulate(surf, s.hw, s.tgrid, 30000, s.z0, s.r0_resc, 314);
    std::vector<TestFunction> fns{gaussian_bump("atm", std::log(92.0), 2.5, 0.15, 1.0),
                                  gaussian_bump("otm", std::log(105.0), 2.0, 0.2, 1.2)};
    std::size_t n = b.n_steps();
    std::vector<std::size_t> steps{n / 3, 2 * n / 3};
    auto rows = discounted_fp_residual(b, surf, s.hw, fns, steps);
    REQUIRE(rows.size() == fns.size() * steps.size());
    for (const auto& row : rows) {
        CHECK(std::isfinite(row.lhs));
        CHECK(std::abs(row.lhs - row.rhs) <= row.err_bar);
    }
}
