#ifndef OTCAL_VALIDATE_HPP
#define OTCAL_VALIDATE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"
#include "otcal/pricing.hpp"

namespace otcal {

/// Euler-Maruyama path ensemble in (Z, r~) with the running trapezoidal
/// discount integral int_0^t r ds per path. Storage is per-step arrays.
struct PathBatch {
    std::size_t n_paths = 0;
    std::vector<double> times;              // t_0 = 0 .. t_N
    std::vector<std::vector<double>> Z;     // [step][path]
    std::vector<std::vector<double>> r;     // rescaled rate r~ = R r
    std::vector<std::vector<double>> disc;  // int_0^{t_k} r ds (unrescaled r)
    std::uint64_t seed = 0;
    std::uint64_t xi_clamped = 0;    // correlation clamps to [-1,1]
    std::uint64_t grid_clamped = 0;  // surface lookups outside the grid hull
    std::uint64_t total_lookups = 0;

    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
    std::size_t index_of(double t) const;
    double clamp_fraction() const {
        return total_lookups ? static_cast<double>(xi_clamped + grid_clamped) /
                                   static_cast<double>(total_lookups)
                             : 0.0;
    }
};

/// Correlated Euler-Maruyama under surfaces (beta11, xi_ref) with the
/// Hull-White rate; correlation xi = xi_ref sigma_r / sqrt(beta11) evaluated
/// at the current state, clamped to [-1,1]. Path blocks run in parallel;
/// each path owns a seed-derived RNG stream, so results are independent of
/// the thread count.
PathBatch euler_simulate(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                         const TimeGrid& tgrid, std::size_t n_paths, double z0,
                         double r0_rescaled, std::uint64_t seed);

struct McPrice {
    double price;
    double std_error;
};

/// Discounted payoff mean over the batch at the given maturity (must sit on
/// a stored step within 1e-9).
McPrice mc_price(const PathBatch& batch, const PayoffFn& payoff, double maturity);

/// Cell-binned marginal law rho_bar and discounted density rho = D rho_bar
/// at one time step, normalized per unit (z, r~) area.
struct DensityEstimate {
    Field2D rho_bar;
    Field2D rho;
    Field2D counts;
    double mass_bar = 0.0;  // integral of rho_bar over the grid
    double mass = 0.0;      // integral of rho (sub-probability)
};

DensityEstimate estimate_density(const PathBatch& batch, std::size_t step,
                                 const SpatialGrid2D& grid);

/// Smooth test function with the derivatives the weak Fokker-Planck form
/// needs.
struct TestFunction {
    std::string name;
    std::function<double(double, double)> phi, dz, dr, dzz, drr, dzr;
};

/// Gaussian bump exp(-(z-z0)^2/2sz^2 - (r-r0)^2/2sr^2) with analytic
/// derivatives.
TestFunction gaussian_bump(std::string name, double z0, double r0, double sz, double sr);

struct FpResidualRow {
    double t;
    std::size_t testfn_id;
    double lhs;      // d/dt <phi, rho>, central difference in t
    double rhs;      // <alpha . grad phi + 1/2 beta : hess phi - r phi, rho>
    double err_bar;  // 3 x MC s.e. of (lhs - rhs) + FD truncation estimate
};

/// Weak-form residual of the discounted Fokker-Planck equation at the given
/// interior steps, both sides estimated from the same path ensemble.
std::vector<FpResidualRow> discounted_fp_residual(const PathBatch& batch,
                                                  const ModelSurfaces& surfaces,
                                                  const HullWhiteParams& hw,
                                                  const std::vector<TestFunction>& testfns,
                                                  const std::vector<std::size_t>& steps);

} // namespace otcal

#endif
