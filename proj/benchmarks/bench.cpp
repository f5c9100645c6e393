#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "otcal/calib.hpp"
#include "otcal/config.hpp"
#include "otcal/cost.hpp"
#include "otcal/grid.hpp"
#include "otcal/hjb.hpp"
#include "otcal/market.hpp"
#include "otcal/pricing.hpp"
#include "otcal/validate.hpp"

using namespace otcal;

namespace {

struct Setup {
    Config cfg;
    SpatialGrid2D grid;
    TimeGrid tgrid;
    HullWhiteParams hw;
    ModelSurfaces gen;

    explicit Setup(std::size_t n)
        : cfg([n] {
              Config c;
              c.n_z = n;
              c.n_r = n;
              return c;
          }()),
          grid(cfg.make_grid()), tgrid(cfg.make_time_grid()),
          hw(cfg.make_hull_white(tgrid)),
          gen(ModelSurfaces::from_generating(grid, tgrid, cfg.make_generating(), hw)) {}
};

void bm_adi_price(benchmark::State& state) {
    Setup s(static_cast<std::size_t>(state.range(0)));
    auto pay = [](double z, double) { return call_payoff(z, 99.0); };
    for (auto _ : state) {
        auto pr = adi_price(s.gen, s.hw, s.tgrid, pay, 120.0 / 360.0, s.cfg.z0(),
                            s.cfg.r0_rescaled());
        benchmark::DoNotOptimize(pr.price);
    }
    state.SetLabel(std::to_string(state.range(0)) + "x" + std::to_string(state.range(0)));
}
BENCHMARK(bm_adi_price)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_implicit_price(benchmark::State& state) {
    Setup s(static_cast<std::size_t>(state.range(0)));
    auto pay = [](double z, double) { return call_payoff(z, 99.0); };
    for (auto _ : state) {
        auto pr = implicit_price(s.gen, s.hw, s.tgrid, pay, 120.0 / 360.0, s.cfg.z0(),
                                 s.cfg.r0_rescaled());
        benchmark::DoNotOptimize(pr.price);
    }
}
BENCHMARK(bm_implicit_price)->Arg(50)->Unit(benchmark::kMillisecond);

void bm_hjb_solve(benchmark::State& state) {
    Setup s(static_cast<std::size_t>(state.range(0)));
    ReferenceModel ref = s.cfg.make_reference(s.grid, s.tgrid.nodes.size());
    auto book = s.cfg.make_instruments();
    for (auto& ins : book) ins.price = 5.0; // placeholder quotes, timing only
    ScaledInstruments sc = vega_scale(book, s.grid, s.tgrid, s.hw, s.cfg.s0, 0.5);
    HJBSolver solver(s.grid, s.tgrid, s.hw, ref, sc.scaled_payoff, sc.maturity_idx,
                     s.cfg.settings, s.cfg.z0(), s.cfg.r0_rescaled());
    std::vector<double> lambda(book.size(), 0.05);
    for (auto _ : state) {
        HJBSolution sol = solver.solve(lambda);
        benchmark::DoNotOptimize(sol.value_at_spot);
    }
}
BENCHMARK(bm_hjb_solve)->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);

void bm_optimal_beta11(benchmark::State& state) {
    double g = -0.7, x_bar = 0.6084, s = 0.0009, p = 4.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimal_beta11(g, x_bar, s, p));
        g = -g;
    }
}
BENCHMARK(bm_optimal_beta11);

void bm_euler_simulate(benchmark::State& state) {
    Setup s(50);
    for (auto _ : state) {
        PathBatch b = euler_simulate(s.gen, s.hw, s.tgrid,
                                     static_cast<std::size_t>(state.range(0)), s.cfg.z0(),
                                     s.cfg.r0_rescaled(), 1);
        benchmark::DoNotOptimize(b.Z.back()[0]);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_euler_simulate)->Arg(10000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
