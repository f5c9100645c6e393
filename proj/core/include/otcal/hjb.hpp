#ifndef OTCAL_HJB_HPP
#define OTCAL_HJB_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"
#include "otcal/pde.hpp"

namespace otcal {

/// Backward solution of the dual HJB equation: one phi and one beta11
/// surface per time node, plus the spot value entering the dual objective.
struct HJBSolution {
    std::vector<Field2D> phi;    // pre-jump slices, phi[k] at t_k
    std::vector<Field2D> beta11; // beta11[k] governs [t_k, t_{k+1})
    double value_at_spot = 0.0;
};

/// phi + sum_i lambda_i * payoff_i over the instruments expiring at the
/// marked node. Payoffs are r-independent.
Field2D apply_jump(const Field2D& phi, const std::vector<double>& lambda,
                   const std::vector<Field2D>& payoffs,
                   const std::vector<std::size_t>& expiring);

/// Dual HJB solver for a fixed market/reference setup; solve() may be called
/// repeatedly with different multipliers (each call is independent).
class HJBSolver {
  public:
    /// payoffs: one (vega-scaled, smoothed) terminal field per instrument,
    /// aligned with instrument_maturity_idx into the time grid.
    HJBSolver(const SpatialGrid2D& grid, const TimeGrid& tgrid,
              const HullWhiteParams& hw, const ReferenceModel& ref,
              std::vector<Field2D> payoffs,
              std::vector<std::size_t> instrument_maturity_idx,
              CalibrationSettings settings, double z0, double r0_rescaled);

    HJBSolution solve(const std::vector<double>& lambda) const;

    /// Policy-evaluation step with beta11 frozen (exposed for testing).
    Field2D implicit_step(const Field2D& phi_next, const Field2D& beta11,
                          std::size_t k, double dt,
                          const FrozenBoundary& frozen_d2) const;

    /// Sup-norm residual of the discrete HJB equation at a converged pair
    /// (phi_k, phi_next, beta11_k); diagnostic for the fixed-point property.
    double discrete_residual(const Field2D& phi_k, const Field2D& phi_next,
                             const Field2D& beta11, std::size_t k, double dt) const;

    const SpatialGrid2D& grid() const { return *grid_; }
    const TimeGrid& tgrid() const { return *tgrid_; }

    /// Flag-gated per-slice CSV dumps (phi_t{k}.csv, beta11_t{k}.csv).
    void enable_dumps(const std::string& dir) { dump_dir_ = dir; }

  private:
    struct PolicyResult {
        Field2D phi;
        Field2D beta11;
        int iterations;
    };
    PolicyResult policy_iteration_step_solve(const Field2D& phi_next, std::size_t k,
                                             double dt, const FrozenBoundary& frozen_d2,
                                             ImplicitStepSolver& solver) const;

    Field2D beta_from_phi(const Field2D& phi, std::size_t k) const;
    std::vector<double> source_from_beta(const Field2D& beta11, std::size_t k) const;

    const SpatialGrid2D* grid_;
    const TimeGrid* tgrid_;
    const HullWhiteParams* hw_;
    const ReferenceModel* ref_;
    std::vector<Field2D> payoffs_;
    std::vector<std::size_t> payoff_maturity_idx_;
    CalibrationSettings settings_;
    double z0_, r0_resc_;
    std::string dump_dir_;
};

} // namespace otcal

#endif
