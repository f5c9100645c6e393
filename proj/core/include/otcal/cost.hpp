#ifndef OTCAL_COST_HPP
#define OTCAL_COST_HPP

#include <limits>

namespace otcal {

/// Convex penalty keeping the variance near its reference value x_bar and
/// strictly above the pole s:
///   H = (p-1) u^{1+p} + (p+1) u^{1-p} - 2p,  u = (x-s)/(x_bar-s),
/// for x, x_bar > s, +infinity otherwise. Minimum 0 at x = x_bar.
double penalty_H(double x, double x_bar, double s, double p);

/// dH/dx = (p^2-1)(u^p - u^{-p})/(x_bar - s). Requires x, x_bar > s.
double penalty_H_prime(double x, double x_bar, double s, double p);

/// Unique x > s solving g/2 = H'(x): the optimal variance characteristic.
/// g stands for phi_zz - phi_z.
double optimal_beta11(double g, double x_bar, double s, double p);

/// The printed closed form without the chain-rule factor on g, kept for
/// comparison; it fails the stationarity condition unless x_bar - s = 1.
double optimal_beta11_printed_form(double g, double x_bar, double s, double p);

/// Variance-dependent part of the Hamiltonian supremum:
///   sup_{x > s} ( g x / 2 - H(x) ) = g beta11*/2 - H(beta11*).
double hamiltonian(double phi_z, double phi_zz, double x_bar, double s, double p);

inline constexpr double kPenaltyInfinity = std::numeric_limits<double>::infinity();

} // namespace otcal

#endif
