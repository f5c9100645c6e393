#ifndef OTCAL_PRICING_HPP
#define OTCAL_PRICING_HPP

#include <functional>
#include <optional>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/hjb.hpp"
#include "otcal/market.hpp"

namespace otcal {

/// Calibrated (or generating) model characteristics on the grid, one slice
/// per time node. beta12 = xi_ref * sigma_r^2 pointwise; the drifts are
/// implied by the Hull-White parameters.
struct ModelSurfaces {
    std::vector<Field2D> beta11;
    std::vector<Field2D> xi_ref;

    static ModelSurfaces from_generating(const SpatialGrid2D& grid, const TimeGrid& tgrid,
                                         const GeneratingModel& gen, const HullWhiteParams& hw);
    static ModelSurfaces from_reference(const ReferenceModel& ref);
    static ModelSurfaces from_hjb(const HJBSolution& sol, const ReferenceModel& ref);

    void validate(const HullWhiteParams& hw, const TimeGrid& tgrid) const;
};

struct PriceResult {
    double price = 0.0;
    std::optional<double> implied_vol;
    Field2D time0_values;
};

using PayoffFn = std::function<double(double z, double r)>;

/// Douglas ADI solve of the linear pricing PDE backward from the payoff:
/// mixed-derivative and reaction terms explicit in the predictor, each 1-D
/// convection-diffusion implicit with weight 1/2. Boundary closure freezes
/// the outward second derivative at its payoff-slice value.
PriceResult adi_price(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                      const TimeGrid& tgrid, const PayoffFn& payoff, double maturity,
                      double z0, double r0_rescaled);

/// Fully implicit solve of the same PDE (cross-check path; shares the HJB
/// step machinery with a zero source).
PriceResult implicit_price(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                           const TimeGrid& tgrid, const PayoffFn& payoff, double maturity,
                           double z0, double r0_rescaled, double lin_tol = 1e-10);

} // namespace otcal

#endif
