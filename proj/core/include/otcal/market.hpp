#ifndef OTCAL_MARKET_HPP
#define OTCAL_MARKET_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "otcal/grid.hpp"

namespace otcal {

/// One calibrating European call.
struct Instrument {
    double maturity;    // years
    int maturity_days;
    double strike;
    double price = 0.0; // market price, set after generation
    double vega = 1.0;  // Black-Scholes vega at the market IV, set by vega_scale
};

/// Hull-White short rate dr = (b(t) - a r) dt + sigma_r dW, plus the constant
/// rescaling r~ = R r under which all solvers operate.
struct HullWhiteParams {
    double a;        // mean reversion, 1/years
    double sigma_r;  // rate vol, 1/sqrt(years)
    double r0;       // initial short rate
    double R = 100.0;
    std::vector<double> b_nodes; // b(t) sampled on the time grid
    std::vector<double> b_times;

    void validate() const;
    /// Linear interpolation between samples, constant extrapolation.
    double b(double t) const;

    /// Zero-coupon bond P(0,T) from the closed-form affine representation,
    /// with the b-integrals done by fine trapezoid over the samples.
    double bond_price(double maturity) const;
};

/// b(t) fitted so the initial forward curve is flat at r0:
/// b(t) = a r0 + sigma_r^2/(2a) (1 - e^{-2at}).
std::vector<double> hw_b_flat_fit(double a, double sigma_r, double r0,
                                  const std::vector<double>& times);

/// Squared log-price diffusion of the CEV model, (sigma e^{z(gamma-1)})^2.
double cev_local_variance(double z, double sigma, double gamma);

/// Smooth approximation of (e^z - K)^+:
/// P_eps(S) = (S-K)/2 + (eps/2) log(2 cosh((S-K)/eps)), overflow-safe.
/// P_eps >= (S-K)^+ with gap at most eps log 2, and slope (tanh((S-K)/eps)+1)/2.
double smoothed_call_payoff(double z, double strike, double eps);

/// Raw call payoff on log-price.
inline double call_payoff(double z, double strike) {
    return std::max(std::exp(z) - strike, 0.0);
}

/// Reference local volatility and correlation weight on the grid, per time
/// node. xi_ref enters the cross term as beta12 = xi_ref sigma_r^2; the
/// penalty pole is s = xi_ref^2 sigma_r^2, required strictly below sigma_bar_sq.
struct ReferenceModel {
    std::vector<Field2D> sigma_bar_sq; // one slice per time node
    std::vector<Field2D> xi_ref;
    double p; // cost exponent, > 2

    /// Time-homogeneous CEV reference: sigma_loc(z) = sigma e^{z(gamma-1)},
    /// correlation xi_corr, so xi_ref = xi_corr sigma_loc / sigma_r.
    static ReferenceModel cev(const SpatialGrid2D& grid, std::size_t n_time_nodes,
                              double sigma, double gamma, double xi_corr,
                              double sigma_r, double p);

    void validate(double sigma_r) const;
};

/// CEV dynamics used to manufacture the synthetic market.
struct GeneratingModel {
    double sigma;
    double gamma;
    double xi;          // instantaneous correlation, in [-1,1]
    double payoff_eps;  // smoothing width, price units

    void validate() const;
};

struct CalibrationSettings {
    double eps1 = 1e-4;         // outer tolerance, sup-norm of gradient (IV units)
    double eps2 = 1e-8;         // policy iteration tolerance, sup-norm of phi update
    int max_outer = 200;
    int max_policy_iter = 100;
    double lin_tol = 1e-10;     // linear solver residual, sup-norm
    int smoothing_epochs = 10;
    int lbfgs_memory = 10;
    int spline_stride = 4;
    double payoff_eps = 0.5;

    void validate() const;
};

} // namespace otcal

#endif
