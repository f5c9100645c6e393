#include "otcal/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace otcal {

namespace {
// u^q for u > 0 via exp/log, avoiding negative-base pow paths
inline double powu(double u, double q) { return std::exp(q * std::log(u)); }
} // namespace

double penalty_H(double x, double x_bar, double s, double p) {
    if (!(x > s) || !(x_bar > s)) return kPenaltyInfinity;
    double u = (x - s) / (x_bar - s);
    return (p - 1.0) * powu(u, 1.0 + p) + (p + 1.0) * powu(u, 1.0 - p) - 2.0 * p;
}

double penalty_H_prime(double x, double x_bar, double s, double p) {
    if (!(x > s) || !(x_bar > s))
        throw std::domain_error("penalty_H_prime: arguments must exceed the pole s");
    double u = (x - s) / (x_bar - s);
    return (p * p - 1.0) * (powu(u, p) - powu(u, -p)) / (x_bar - s);
}

double optimal_beta11(double g, double x_bar, double s, double p) {
    if (!std::isfinite(g)) throw std::invalid_argument("optimal_beta11: non-finite g");
    if (!(x_bar > s)) throw std::domain_error("optimal_beta11: x_bar must exceed s");
    // Stationarity g/2 = H'(x) with w = u^p reads w - 1/w = g (x_bar-s) / (2(p^2-1)),
    // so w = m + sqrt(m^2+1) with m half the right-hand side.
    double m = g * (x_bar - s) / (4.0 * (p * p - 1.0));
    double w = m >= 0.0 ? m + std::hypot(m, 1.0) : 1.0 / (std::hypot(m, 1.0) - m);
    return s + (x_bar - s) * powu(w, 1.0 / p);
}

double optimal_beta11_printed_form(double g, double x_bar, double s, double p) {
    if (!(x_bar > s)) throw std::domain_error("optimal_beta11_printed_form: x_bar must exceed s");
    double d = x_bar - s;
    double c = powu(d, p) * g / (4.0 * (p * p - 1.0));
    double q = powu(d, p);
    return s + powu(c + std::sqrt(c * c + q * q), 1.0 / p);
}

double hamiltonian(double phi_z, double phi_zz, double x_bar, double s, double p) {
    double g = phi_zz - phi_z;
    double x = optimal_beta11(g, x_bar, s, p);
    return 0.5 * g * x - penalty_H(x, x_bar, s, p);
}

} // namespace otcal
