#include "doctest.h"

#include <cmath>
#include <random>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"
#include "otcal/pde.hpp"

using namespace otcal;

namespace {

HullWhiteParams make_hw() {
    HullWhiteParams hw{0.4, 0.05, 0.025};
    hw.b_times = {0.0, 1.0};
    hw.b_nodes = hw_b_flat_fit(hw.a, hw.sigma_r, hw.r0, hw.b_times);
    return hw;
}

} // namespace

TEST_CASE("apply_operator reproduces the generator on a smooth field") {
    SpatialGrid2D grid(4.0, 5.0, 0.0, 5.0, 60, 60);
    HullWhiteParams hw = make_hw();
    Field2D beta11(grid, 0.6), xi(grid, -6.0);
    StepCoeffs c = make_step_coeffs(hw, beta11, xi, 0.1);

    Field2D f(grid);
    for (std::size_t i = 0; i < grid.n_z; ++i)
        for (std::size_t j = 0; j < grid.n_r; ++j)
            f(i, j) = std::sin(grid.z(i)) * std::cos(0.3 * grid.r(j));
    Field2D Lf = apply_operator(c, f);

    double R = hw.R;
    for (std::size_t i = 2; i + 2 < grid.n_z; ++i)
        for (std::size_t j = 2; j + 2 < grid.n_r; ++j) {
            double z = grid.z(i), r = grid.r(j);
            double fz = std::cos(z) * std::cos(0.3 * r);
            double fzz = -std::sin(z) * std::cos(0.3 * r);
            double fr = -0.3 * std::sin(z) * std::sin(0.3 * r);
            double frr = -0.09 * std::sin(z) * std::cos(0.3 * r);
            double fzr = -0.3 * std::cos(z) * std::sin(0.3 * r);
            double expect = (r / R - 0.3) * fz + (R * hw.b(0.1) - hw.a * r) * fr + 0.3 * fzz +
                            0.5 * (R * hw.sigma_r) * (R * hw.sigma_r) * frr +
                            R * (-6.0) * hw.sigma_r * hw.sigma_r * fzr - (r / R) * f(i, j);
            CHECK(Lf(i, j) == doctest::Approx(expect).epsilon(5e-3));
        }
}

TEST_CASE("implicit step satisfies the backward-Euler stencil in the interior") {
    SpatialGrid2D grid(4.0, 5.0, 0.0, 5.0, 40, 40);
    HullWhiteParams hw = make_hw();
    Field2D beta11(grid, 0.6), xi(grid, -6.0);
    StepCoeffs c = make_step_coeffs(hw, beta11, xi, 0.0);

    Field2D f_next(grid);
    for (std::size_t i = 0; i < grid.n_z; ++i)
        for (std::size_t j = 0; j < grid.n_r; ++j)
            f_next(i, j) = std::exp(grid.z(i)) * (1.0 + 0.01 * grid.r(j));
    FrozenBoundary fb = frozen_boundary_d2(f_next);
    ImplicitStepSolver solver(grid);
    double dt = 1.0 / 365.0;
    Field2D f = solver.step(c, f_next, dt, fb, {}, 1e-10);
    CHECK(solver.last_residual() < 1e-10);
    CHECK(f.all_finite());
    // interior rows: (f - f_next)/dt = L f, with L from the same stencils
    Field2D Lf = apply_operator(c, f);
    for (std::size_t i = 1; i + 1 < grid.n_z; ++i)
        for (std::size_t j = 1; j + 1 < grid.n_r; ++j) {
            double resid = (f(i, j) - f_next(i, j)) / dt - Lf(i, j);
            CHECK(std::abs(resid) < 1e-6 * (1.0 + std::abs(f(i, j)) / dt));
        }
}

TEST_CASE("banded system solves a random tridiagonal") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    int n = 50;
    std::vector<double> lo(n), di(n), up(n), x(n);
    for (int i = 0; i < n; ++i) {
        lo[i] = -u(rng);
        up[i] = -u(rng);
        di[i] = 4.0 + u(rng);
        x[i] = u(rng) - 1.0;
    }
    BandedSystem bs(n, 1, 1);
    bs.reset();
    for (int i = 0; i < n; ++i) {
        bs.add(i, i, di[i]);
        if (i > 0) bs.add(i, i - 1, lo[i]);
        if (i + 1 < n) bs.add(i, i + 1, up[i]);
    }
    for (int i = 0; i < n; ++i) {
        double b = di[i] * x[i];
        if (i > 0) b += lo[i] * x[i - 1];
        if (i + 1 < n) b += up[i] * x[i + 1];
        bs.rhs()[i] = b;
    }
    bs.solve();
    for (int i = 0; i < n; ++i) CHECK(bs.rhs()[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("frozen boundary picks up one-sided second derivatives") {
    SpatialGrid2D grid(0.0, 1.0, 0.0, 1.0, 11, 11);
    Field2D f(grid);
    for (std::size_t i = 0; i < grid.n_z; ++i)
        for (std::size_t j = 0; j < grid.n_r; ++j) {
            double z = grid.z(i), r = grid.r(j);
            f(i, j) = z * z + 3.0 * r * r;
        }
    FrozenBoundary fb = frozen_boundary_d2(f);
    // z-faces carry d2f/dz2 = 2, r-faces d2f/dr2 = 6, interior entries 0
    CHECK(fb.dzz[grid.idx(0, 5)] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fb.dzz[grid.idx(grid.n_z - 1, 5)] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fb.drr[grid.idx(5, 0)] == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(fb.drr[grid.idx(5, grid.n_r - 1)] == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(fb.dzz[grid.idx(5, 5)] == 0.0);
    CHECK(fb.drr[grid.idx(5, 5)] == 0.0);
}
