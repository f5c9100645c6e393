#ifndef OTCAL_CALIB_HPP
#define OTCAL_CALIB_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/hjb.hpp"
#include "otcal/market.hpp"
#include "otcal/pricing.hpp"

namespace otcal {

/// Instruments after vega rescaling: price and payoff divided by the
/// Black-Scholes vega at the market IV, so dual-gradient components read as
/// implied-volatility gaps.
struct ScaledInstruments {
    std::vector<Instrument> instruments;  // vega field populated
    std::vector<double> scaled_price;     // u_i / vega_i
    std::vector<Field2D> scaled_payoff;   // smoothed payoff / vega_i
    std::vector<std::size_t> maturity_idx;
};

ScaledInstruments vega_scale(const std::vector<Instrument>& instruments,
                             const SpatialGrid2D& grid, const TimeGrid& tgrid,
                             const HullWhiteParams& hw, double spot, double payoff_eps);

struct DualState {
    Eigen::VectorXd lambda;
    double L = 0.0;
    Eigen::VectorXd grad;
    int iterations = 0;
    bool converged = false;
};

/// Per-iteration trace hook: (iteration, L, sup-norm gradient, wall ms).
using TraceFn = std::function<void(int, double, double, double)>;

/// Per-epoch hook: (epoch, beta11 surface total variation, state after the
/// epoch's optimization). Epoch 0 is the raw calibration.
using EpochFn = std::function<void(int, double, const DualState&)>;

enum class GradientPricer { Adi, Implicit };

/// Outer dual optimization L(lambda) = lambda . u - phi^lambda(0, Z0, r0),
/// with analytic gradients u_i - (model price of instrument i) priced on the
/// surfaces the HJB solve returns.
class Calibrator {
  public:
    Calibrator(const SpatialGrid2D& grid, const TimeGrid& tgrid, const HullWhiteParams& hw,
               ReferenceModel ref, ScaledInstruments scaled, CalibrationSettings settings,
               double z0, double r0_rescaled,
               GradientPricer pricer = GradientPricer::Adi);

    struct Eval {
        double L;
        Eigen::VectorXd grad;
        HJBSolution sol;
    };
    Eval dual_objective_and_gradient(const Eigen::VectorXd& lambda) const;

    /// L-BFGS ascent on L with strong Wolfe line search (c1 = 1e-4, c2 = 0.9).
    DualState lbfgs_minimize(const Eigen::VectorXd& lambda0, const TraceFn& trace = {}) const;

    struct Result {
        ModelSurfaces surfaces;
        DualState state;
        int epochs_run = 0;
    };
    /// Calibrate, then iterate: spline-smooth the beta11 surfaces into a new
    /// reference and recalibrate warm-started; the last pass does no
    /// smoothing afterwards. epochs = 0 returns the raw calibration.
    Result smooth_and_recalibrate(int epochs, const TraceFn& trace = {},
                                  const EpochFn& on_epoch = {});

    const ReferenceModel& reference() const { return ref_; }
    const ScaledInstruments& scaled() const { return scaled_; }
    ModelSurfaces surfaces_for(const HJBSolution& sol) const {
        return ModelSurfaces::from_hjb(sol, ref_);
    }

  private:
    HJBSolver make_solver() const;

    const SpatialGrid2D* grid_;
    const TimeGrid* tgrid_;
    const HullWhiteParams* hw_;
    ReferenceModel ref_;
    ScaledInstruments scaled_;
    CalibrationSettings settings_;
    double z0_, r0_resc_;
    GradientPricer pricer_;
};

/// Natural cubic spline through (x, y); evaluates by binary search with
/// linear extrapolation outside the knots.
class CubicSpline {
  public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;

  private:
    std::vector<double> x_, y_, m_; // m = second derivatives at the knots
};

/// Tensorized z-then-r spline smoothing through every stride-th node.
Field2D spline_smooth(const Field2D& f, int stride);

/// Sum of |delta beta11| over grid edges, accumulated over all slices.
double surface_total_variation(const std::vector<Field2D>& slices);

} // namespace otcal

#endif
