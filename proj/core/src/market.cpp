#include "otcal/market.hpp"

#include <algorithm>
#include <stdexcept>

namespace otcal {

void HullWhiteParams::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("HullWhiteParams: a must be positive");
    if (!(sigma_r > 0.0)) throw std::invalid_argument("HullWhiteParams: sigma_r must be positive");
    if (!(R > 0.0)) throw std::invalid_argument("HullWhiteParams: R must be positive");
    if (b_nodes.size() != b_times.size() || b_nodes.empty())
        throw std::invalid_argument("HullWhiteParams: b samples missing");
    for (double v : b_nodes)
        if (!std::isfinite(v)) throw std::invalid_argument("HullWhiteParams: non-finite b sample");
}

double HullWhiteParams::b(double t) const {
    if (t <= b_times.front()) return b_nodes.front();
    if (t >= b_times.back()) return b_nodes.back();
    auto it = std::upper_bound(b_times.begin(), b_times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - b_times.begin());
    double w = (t - b_times[k - 1]) / (b_times[k] - b_times[k - 1]);
    return (1.0 - w) * b_nodes[k - 1] + w * b_nodes[k];
}

double HullWhiteParams::bond_price(double maturity) const {
    const double T = maturity;
    auto B = [&](double s) { return (1.0 - std::exp(-a * (T - s))) / a; };
    // ln A = -int b(s) B(s,T) ds + (sigma_r^2/2) int B(s,T)^2 ds, composite Simpson
    const int n = 2000;
    const double h = T / n;
    double ib = 0.0, ib2 = 0.0;
    for (int k = 0; k <= n; ++k) {
        double s = k * h;
        double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        ib += w * b(s) * B(s);
        ib2 += w * B(s) * B(s);
    }
    ib *= h / 3.0;
    ib2 *= h / 3.0;
    double lnA = -ib + 0.5 * sigma_r * sigma_r * ib2;
    return std::exp(lnA - B(0.0) * r0);
}

std::vector<double> hw_b_flat_fit(double a, double sigma_r, double r0,
                                  const std::vector<double>& times) {
    if (!(a > 0.0)) throw std::invalid_argument("hw_b_flat_fit: a must be positive");
    std::vector<double> b(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        b[k] = a * r0 + sigma_r * sigma_r / (2.0 * a) * (1.0 - std::exp(-2.0 * a * times[k]));
    return b;
}

double cev_local_variance(double z, double sigma, double gamma) {
    double v = sigma * std::exp(z * (gamma - 1.0));
    return v * v;
}

double smoothed_call_payoff(double z, double strike, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("smoothed_call_payoff: eps must be positive");
    double x = (std::exp(z) - strike) / eps;
    // (eps/2) log(2 cosh x) = (eps/2)(|x| + log(1 + e^{-2|x|}))
    double ax = std::abs(x);
    return 0.5 * eps * x + 0.5 * eps * (ax + std::log1p(std::exp(-2.0 * ax)));
}

ReferenceModel ReferenceModel::cev(const SpatialGrid2D& grid, std::size_t n_time_nodes,
                                   double sigma, double gamma, double xi_corr,
                                   double sigma_r, double p) {
    Field2D var(grid), xi(grid);
    for (std::size_t i = 0; i < grid.n_z; ++i) {
        double lv = cev_local_variance(grid.z(i), sigma, gamma);
        double xr = xi_corr * std::sqrt(lv) / sigma_r;
        for (std::size_t j = 0; j < grid.n_r; ++j) {
            var(i, j) = lv;
            xi(i, j) = xr;
        }
    }
    ReferenceModel ref;
    ref.sigma_bar_sq.assign(n_time_nodes, var);
    ref.xi_ref.assign(n_time_nodes, xi);
    ref.p = p;
    return ref;
}

void ReferenceModel::validate(double sigma_r) const {
    if (!(p > 2.0)) throw std::invalid_argument("ReferenceModel: p must exceed 2");
    if (sigma_bar_sq.empty() || sigma_bar_sq.size() != xi_ref.size())
        throw std::invalid_argument("ReferenceModel: slice count mismatch");
    for (std::size_t k = 0; k < sigma_bar_sq.size(); ++k) {
        const auto& var = sigma_bar_sq[k];
        const auto& xi = xi_ref[k];
        for (std::size_t m = 0; m < var.size(); ++m) {
            double s = xi.data()[m] * xi.data()[m] * sigma_r * sigma_r;
            if (!(var.data()[m] > s))
                throw std::invalid_argument(
                    "ReferenceModel: sigma_bar_sq must exceed xi_ref^2 sigma_r^2 everywhere");
        }
    }
}

void GeneratingModel::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("GeneratingModel: sigma must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("GeneratingModel: gamma must be nonnegative");
    if (std::abs(xi) > 1.0) throw std::invalid_argument("GeneratingModel: |xi| must be <= 1");
    if (!(payoff_eps > 0.0)) throw std::invalid_argument("GeneratingModel: payoff_eps must be positive");
}

void CalibrationSettings::validate() const {
    if (!(eps1 > 0.0) || !(eps2 > 0.0))
        throw std::invalid_argument("CalibrationSettings: tolerances must be positive");
    if (max_outer < 1 || max_policy_iter < 1)
        throw std::invalid_argument("CalibrationSettings: iteration limits must be positive");
    if (!(lin_tol > 0.0)) throw std::invalid_argument("CalibrationSettings: lin_tol must be positive");
    if (smoothing_epochs < 0) throw std::invalid_argument("CalibrationSettings: negative epochs");
    if (lbfgs_memory < 1 || spline_stride < 1)
        throw std::invalid_argument("CalibrationSettings: memory/stride must be positive");
    if (!(payoff_eps > 0.0)) throw std::invalid_argument("CalibrationSettings: payoff_eps must be positive");
}

} // namespace otcal
