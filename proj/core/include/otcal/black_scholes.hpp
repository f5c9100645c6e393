#ifndef OTCAL_BLACK_SCHOLES_HPP
#define OTCAL_BLACK_SCHOLES_HPP

namespace otcal {

/// Black-Scholes call on the forward S0/df with the given discount factor.
double bs_price(double S0, double strike, double maturity, double vol, double df);

/// d(price)/d(vol), per unit vol.
double bs_vega(double S0, double strike, double maturity, double vol, double df);

/// Inverts bs_price by safeguarded Newton/bisection to 1e-10 in price.
/// Throws std::domain_error if price is outside the no-arbitrage bounds.
double implied_vol(double price, double S0, double strike, double maturity, double df);

double norm_cdf(double x);
double norm_pdf(double x);

} // namespace otcal

#endif
