#include "doctest.h"

#include <cmath>
#include <random>

#include "otcal/grid.hpp"

using namespace otcal;

TEST_CASE("time grid puts every maturity on a node") {
    TimeGrid tg = TimeGrid::daily({60, 120});
    CHECK(tg.nodes.front() == 0.0);
    CHECK(tg.horizon() == doctest::Approx(120.0 / 360.0).epsilon(1e-14));
    CHECK(tg.maturity_idx.size() == 2);
    CHECK(tg.nodes[tg.maturity_idx[0]] == doctest::Approx(60.0 / 360.0).epsilon(1e-14));
    CHECK(tg.nodes[tg.maturity_idx[1]] == doctest::Approx(120.0 / 360.0).epsilon(1e-14));
    for (std::size_t k = 0; k + 1 < tg.nodes.size(); ++k) CHECK(tg.dt(k) > 0.0);
    // steps never exceed one calendar day
    for (std::size_t k = 0; k + 1 < tg.nodes.size(); ++k)
        CHECK(tg.dt(k) <= 1.0 / 365.0 + 1e-12);
    CHECK(tg.is_maturity(tg.maturity_idx[0]));
    CHECK(!tg.is_maturity(1));
    CHECK(tg.index_of(60.0 / 360.0) == tg.maturity_idx[0]);
    CHECK_THROWS_AS(tg.index_of(0.12345), std::invalid_argument);
}

TEST_CASE("time grid refinement") {
    TimeGrid coarse = TimeGrid::daily({60});
    TimeGrid fine = TimeGrid::daily({60}, 2);
    CHECK(fine.n_steps() > 2 * coarse.n_steps() - 4);
    CHECK(fine.horizon() == doctest::Approx(coarse.horizon()).epsilon(1e-14));
}

TEST_CASE("bilinear interpolation is exact on bilinear functions") {
    SpatialGrid2D g(4.0, 5.0, 0.0, 5.0, 11, 13);
    Field2D f(g);
    auto lin = [](double z, double r) { return 2.0 + 3.0 * z - 0.7 * r + 0.25 * z * r; };
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) f(i, j) = lin(g.z(i), g.r(j));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uz(4.0, 5.0), ur(0.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        double z = uz(rng), r = ur(rng);
        CHECK(f.interp(z, r) == doctest::Approx(lin(z, r)).epsilon(1e-12));
    }
    // clamping outside the hull
    CHECK(f.interp(3.0, 2.0) == doctest::Approx(f.interp(4.0, 2.0)));
    CHECK(f.interp(4.5, 9.0) == doctest::Approx(f.interp(4.5, 5.0)));
}

TEST_CASE("central differences are exact on quadratics") {
    SpatialGrid2D g(4.0, 5.0, 0.0, 5.0, 21, 17);
    Field2D f(g);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            double z = g.z(i), r = g.r(j);
            f(i, j) = 1.0 + z + 2.0 * r + 0.5 * z * z - 0.3 * r * r + 0.8 * z * r;
        }
    Derivs2D d = central_diffs(f);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            double z = g.z(i), r = g.r(j);
            CHECK(d.f_z(i, j) == doctest::Approx(1.0 + z + 0.8 * r).epsilon(1e-10));
            CHECK(d.f_r(i, j) == doctest::Approx(2.0 - 0.6 * r + 0.8 * z).epsilon(1e-10));
            CHECK(d.f_zz(i, j) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(d.f_rr(i, j) == doctest::Approx(-0.6).epsilon(1e-9));
            CHECK(d.f_zr(i, j) == doctest::Approx(0.8).epsilon(1e-9));
        }
}

TEST_CASE("integrate_against against a separable product") {
    SpatialGrid2D g(0.0, 1.0, 0.0, 2.0, 101, 101);
    Field2D f(g), rho(g);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            f(i, j) = g.z(i);
            rho(i, j) = g.r(j);
        }
    // int_0^1 z dz * int_0^2 r dr = 0.5 * 2 = 1
    CHECK(integrate_against(f, rho) == doctest::Approx(1.0).epsilon(1e-6));
}
