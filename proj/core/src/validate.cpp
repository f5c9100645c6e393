#include "otcal/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace otcal {

std::size_t PathBatch::index_of(double t) const {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - t) < 1e-9) return k;
    throw std::invalid_argument("PathBatch: time off the stored steps");
}

namespace {

struct BlockCounters {
    std::uint64_t xi_clamped = 0;
    std::uint64_t grid_clamped = 0;
    std::uint64_t lookups = 0;
};

} // namespace

PathBatch euler_simulate(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                         const TimeGrid& tgrid, std::size_t n_paths, double z0,
                         double r0_rescaled, std::uint64_t seed) {
    if (surfaces.beta11.size() < tgrid.nodes.size())
        throw std::invalid_argument("euler_simulate: missing beta11 slices");
    const SpatialGrid2D& g = surfaces.beta11.front().grid();
    const std::size_t n_steps = tgrid.n_steps();
    const double R = hw.R;

    PathBatch batch;
    batch.n_paths = n_paths;
    batch.times = tgrid.nodes;
    batch.seed = seed;
    batch.Z.assign(n_steps + 1, std::vector<double>(n_paths));
    batch.r.assign(n_steps + 1, std::vector<double>(n_paths));
    batch.disc.assign(n_steps + 1, std::vector<double>(n_paths, 0.0));
    std::fill(batch.Z[0].begin(), batch.Z[0].end(), z0);
    std::fill(batch.r[0].begin(), batch.r[0].end(), r0_rescaled);

    const std::size_t block = 4096;
    const std::size_t n_blocks = (n_paths + block - 1) / block;
    std::vector<BlockCounters> counters(n_blocks);

    auto run_block = [&](std::size_t b) {
        BlockCounters& c = counters[b];
        const std::size_t lo = b * block, hi = std::min(n_paths, lo + block);
        for (std::size_t p = lo; p < hi; ++p) {
            // per-path stream: deterministic regardless of thread scheduling
            std::seed_seq sq{seed, static_cast<std::uint64_t>(p)};
            std::mt19937_64 eng(sq);
            std::normal_distribution<double> gauss;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double dt = tgrid.dt(k);
                const double z = batch.Z[k][p];
                const double rt = batch.r[k][p];

                ++c.lookups;
                if (z < g.z_min || z > g.z_max || rt < g.r_min || rt > g.r_max)
                    ++c.grid_clamped;
                const double b11 = std::max(surfaces.beta11[k].interp(z, rt), 0.0);
                const double sig = std::sqrt(b11);
                double xi = 0.0;
                if (sig > 0.0) {
                    xi = surfaces.xi_ref[k].interp(z, rt) * hw.sigma_r / sig;
                    if (xi > 1.0 || xi < -1.0) {
                        xi = std::clamp(xi, -1.0, 1.0);
                        ++c.xi_clamped;
                    }
                }
                const double g1 = gauss(eng), g2 = gauss(eng);
                const double w1 = g1;
                const double w2 = xi * g1 + std::sqrt(std::max(0.0, 1.0 - xi * xi)) * g2;
                const double sdt = std::sqrt(dt);

                const double z_new = z + (rt / R - 0.5 * b11) * dt + sig * sdt * w1;
                const double r_new =
                    rt + (R * hw.b(tgrid.nodes[k]) - hw.a * rt) * dt + R * hw.sigma_r * sdt * w2;
                batch.Z[k + 1][p] = z_new;
                batch.r[k + 1][p] = r_new;
                batch.disc[k + 1][p] = batch.disc[k][p] + 0.5 * (rt + r_new) / R * dt;
            }
        }
    };

    std::vector<std::future<void>> jobs;
    jobs.reserve(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b)
        jobs.push_back(std::async(std::launch::async, run_block, b));
    for (auto& j : jobs) j.get();
    for (const auto& c : counters) {
        batch.xi_clamped += c.xi_clamped;
        batch.grid_clamped += c.grid_clamped;
        batch.total_lookups += c.lookups;
    }
    return batch;
}

McPrice mc_price(const PathBatch& batch, const PayoffFn& payoff, double maturity) {
    const std::size_t k = batch.index_of(maturity);
    const std::size_t n = batch.n_paths;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double v = std::exp(-batch.disc[k][p]) * payoff(batch.Z[k][p], batch.r[k][p]);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

DensityEstimate estimate_density(const PathBatch& batch, std::size_t step,
                                 const SpatialGrid2D& grid) {
    DensityEstimate est;
    est.rho_bar = Field2D(grid);
    est.rho = Field2D(grid);
    est.counts = Field2D(grid);
    const double cell = grid.h_z * grid.h_r;
    const double n = static_cast<double>(batch.n_paths);
    std::size_t inside = 0;
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const double z = batch.Z[step][p], r = batch.r[step][p];
        if (z < grid.z_min || z > grid.z_max || r < grid.r_min || r > grid.r_max) continue;
        // nearest-node binning; boundary nodes own half/quarter cells, ignored
        const auto i = static_cast<std::size_t>(
            std::lround(std::clamp((z - grid.z_min) / grid.h_z, 0.0,
                                   static_cast<double>(grid.n_z - 1))));
        const auto j = static_cast<std::size_t>(
            std::lround(std::clamp((r - grid.r_min) / grid.h_r, 0.0,
                                   static_cast<double>(grid.n_r - 1))));
        est.counts(i, j) += 1.0;
        est.rho_bar(i, j) += 1.0 / (n * cell);
        est.rho(i, j) += std::exp(-batch.disc[step][p]) / (n * cell);
        ++inside;
    }
    Field2D ones(grid, 1.0);
    est.mass_bar = integrate_against(ones, est.rho_bar);
    est.mass = integrate_against(ones, est.rho);
    (void)inside;
    return est;
}

TestFunction gaussian_bump(std::string name, double z0, double r0, double sz, double sr) {
    TestFunction f;
    f.name = std::move(name);
    const double isz = 1.0 / (sz * sz), isr = 1.0 / (sr * sr);
    auto base = [=](double z, double r) {
        const double dz = z - z0, dr = r - r0;
        return std::exp(-0.5 * (dz * dz * isz + dr * dr * isr));
    };
    f.phi = base;
    f.dz = [=](double z, double r) { return -(z - z0) * isz * base(z, r); };
    f.dr = [=](double z, double r) { return -(r - r0) * isr * base(z, r); };
    f.dzz = [=](double z, double r) {
        const double dz = z - z0;
        return (dz * dz * isz - 1.0) * isz * base(z, r);
    };
    f.drr = [=](double z, double r) {
        const double dr = r - r0;
        return (dr * dr * isr - 1.0) * isr * base(z, r);
    };
    f.dzr = [=](double z, double r) { return (z - z0) * isz * (r - r0) * isr * base(z, r); };
    return f;
}

std::vector<FpResidualRow> discounted_fp_residual(const PathBatch& batch,
                                                  const ModelSurfaces& surfaces,
                                                  const HullWhiteParams& hw,
                                                  const std::vector<TestFunction>& testfns,
                                                  const std::vector<std::size_t>& steps) {
    const std::size_t n = batch.n_paths;
    const double R = hw.R;
    std::vector<FpResidualRow> rows;

    auto moment = [&](const TestFunction& f, std::size_t k, std::size_t p) {
        return std::exp(-batch.disc[k][p]) * f.phi(batch.Z[k][p], batch.r[k][p]);
    };

    for (std::size_t fi = 0; fi < testfns.size(); ++fi) {
        const TestFunction& f = testfns[fi];
        for (std::size_t k : steps) {
            if (k == 0 || k + 1 >= batch.times.size())
                throw std::invalid_argument("discounted_fp_residual: interior steps only");
            const double t = batch.times[k];
            const double two_dt = batch.times[k + 1] - batch.times[k - 1];

            // per-path residual sample: central difference of the discounted
            // moment minus the discounted generator term, same ensemble
            double lhs_sum = 0.0, rhs_sum = 0.0, res_sum = 0.0, res_sum2 = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                const double lhs_p = (moment(f, k + 1, p) - moment(f, k - 1, p)) / two_dt;

                const double z = batch.Z[k][p], rt = batch.r[k][p];
                const double b11 = std::max(surfaces.beta11[k].interp(z, rt), 0.0);
                const double b12 = R * surfaces.xi_ref[k].interp(z, rt) * hw.sigma_r * hw.sigma_r;
                const double b22 = R * hw.sigma_r * R * hw.sigma_r;
                const double az = rt / R - 0.5 * b11;
                const double ar = R * hw.b(t) - hw.a * rt;
                const double gen = az * f.dz(z, rt) + ar * f.dr(z, rt) +
                                   0.5 * b11 * f.dzz(z, rt) + 0.5 * b22 * f.drr(z, rt) +
                                   b12 * f.dzr(z, rt) - (rt / R) * f.phi(z, rt);
                const double rhs_p = std::exp(-batch.disc[k][p]) * gen;

                lhs_sum += lhs_p;
                rhs_sum += rhs_p;
                const double d = lhs_p - rhs_p;
                res_sum += d;
                res_sum2 += d * d;
            }
            const double nn = static_cast<double>(n);
            const double res_mean = res_sum / nn;
            const double res_var = std::max(0.0, res_sum2 / nn - res_mean * res_mean);
            const double mc_se = std::sqrt(res_var / nn);

            // central-difference truncation ~ dt^2/6 |M'''|, estimated from a
            // five-point third difference of the moment curve when available
            double fd_bias = 0.0;
            if (k >= 2 && k + 2 < batch.times.size()) {
                double m[5];
                for (int o = -2; o <= 2; ++o) {
                    double s = 0.0;
                    for (std::size_t p = 0; p < n; ++p)
                        s += moment(f, k + static_cast<std::size_t>(o + 2) - 2, p);
                    m[o + 2] = s / nn;
                }
                const double dt = 0.5 * two_dt;
                const double d3 = (m[4] - 2.0 * m[3] + 2.0 * m[1] - m[0]) / (2.0 * dt * dt * dt);
                fd_bias = dt * dt / 6.0 * std::abs(d3);
            }

            rows.push_back({t, fi, lhs_sum / nn, rhs_sum / nn, 3.0 * mc_se + fd_bias});
        }
    }
    return rows;
}

} // namespace otcal
