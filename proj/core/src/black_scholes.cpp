#include "otcal/black_scholes.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otcal {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double bs_price(double S0, double strike, double maturity, double vol, double df) {
    if (!(vol > 0.0) || !(maturity > 0.0))
        throw std::invalid_argument("bs_price: vol and maturity must be positive");
    double F = S0 / df;
    double sq = vol * std::sqrt(maturity);
    double d1 = (std::log(F / strike) + 0.5 * sq * sq) / sq;
    double d2 = d1 - sq;
    return df * (F * norm_cdf(d1) - strike * norm_cdf(d2));
}

double bs_vega(double S0, double strike, double maturity, double vol, double df) {
    if (!(vol > 0.0) || !(maturity > 0.0))
        throw std::invalid_argument("bs_vega: vol and maturity must be positive");
    double F = S0 / df;
    double sq = vol * std::sqrt(maturity);
    double d1 = (std::log(F / strike) + 0.5 * sq * sq) / sq;
    return df * F * norm_pdf(d1) * std::sqrt(maturity);
}

double implied_vol(double price, double S0, double strike, double maturity, double df) {
    double F = S0 / df;
    double lower = df * std::max(F - strike, 0.0);
    if (!(price > lower) || !(price < S0))
        throw std::domain_error("implied_vol: price outside no-arbitrage bounds");
    double lo = 1e-8, hi = 10.0;
    while (bs_price(S0, strike, maturity, hi, df) < price) {
        hi *= 2.0;
        if (hi > 1e4) throw std::domain_error("implied_vol: no bracket");
    }
    double v = 0.5;
    for (int it = 0; it < 200; ++it) {
        double pv = bs_price(S0, strike, maturity, v, df);
        if (std::abs(pv - price) < 1e-10) return v;
        if (pv > price) hi = v; else lo = v;
        double vega = bs_vega(S0, strike, maturity, v, df);
        double step = (pv - price) / vega;
        double vn = v - step;
        v = (vn > lo && vn < hi) ? vn : 0.5 * (lo + hi); // bisect when Newton leaves the bracket
    }
    return v;
}

} // namespace otcal
