#include "otcal/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace otcal {

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::istringstream is(s);
    T v;
    while (is >> v) out.push_back(v);
    return out;
}

} // namespace

Config Config::load(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(path, pt);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: cannot parse ") + path + ": " + e.what());
    }

    Config c;
    c.z_min = pt.get("grid.z_min", c.z_min);
    c.z_max = pt.get("grid.z_max", c.z_max);
    c.r_min = pt.get("grid.r_min", c.r_min);
    c.r_max = pt.get("grid.r_max", c.r_max);
    c.n_z = pt.get("grid.n_z", c.n_z);
    c.n_r = pt.get("grid.n_r", c.n_r);

    c.steps_per_day = pt.get("time.steps_per_day", c.steps_per_day);

    c.a = pt.get("hullwhite.a", c.a);
    c.sigma_r = pt.get("hullwhite.sigma_r", c.sigma_r);
    c.r0 = pt.get("hullwhite.r0", c.r0);
    c.R = pt.get("hullwhite.R", c.R);

    c.ref_sigma = pt.get("reference.sigma", c.ref_sigma);
    c.ref_gamma = pt.get("reference.gamma", c.ref_gamma);
    c.ref_xi = pt.get("reference.xi", c.ref_xi);
    c.p = pt.get("reference.p", c.p);

    c.gen_sigma = pt.get("generating.sigma", c.gen_sigma);
    c.gen_gamma = pt.get("generating.gamma", c.gen_gamma);
    c.gen_xi = pt.get("generating.xi", c.gen_xi);

    c.s0 = pt.get("instruments.s0", c.s0);
    if (auto m = pt.get_optional<std::string>("instruments.maturity_days"))
        c.maturity_days = parse_list<int>(*m);
    if (auto k = pt.get_optional<std::string>("instruments.strikes"))
        c.strikes = parse_list<double>(*k);

    c.settings.eps1 = pt.get("settings.eps1", c.settings.eps1);
    c.settings.eps2 = pt.get("settings.eps2", c.settings.eps2);
    c.settings.max_outer = pt.get("settings.max_outer", c.settings.max_outer);
    c.settings.max_policy_iter = pt.get("settings.max_policy_iter", c.settings.max_policy_iter);
    c.settings.lin_tol = pt.get("settings.lin_tol", c.settings.lin_tol);
    c.settings.smoothing_epochs = pt.get("settings.smoothing_epochs", c.settings.smoothing_epochs);
    c.settings.lbfgs_memory = pt.get("settings.lbfgs_memory", c.settings.lbfgs_memory);
    c.settings.spline_stride = pt.get("settings.spline_stride", c.settings.spline_stride);
    c.settings.payoff_eps = pt.get("settings.payoff_eps", c.settings.payoff_eps);

    c.validate();
    return c;
}

void Config::validate() const {
    const auto fail = [](const std::string& what) {
        throw std::invalid_argument("config: " + what);
    };
    if (!(z_min < z_max)) fail("grid: z_min < z_max violated");
    if (!(r_min < r_max)) fail("grid: r_min < r_max violated");
    if (n_z < 3 || n_r < 3) fail("grid: need at least 3 nodes per axis");
    if (steps_per_day < 1) fail("time: steps_per_day >= 1 violated");
    if (!(a > 0.0)) fail("hullwhite: a > 0 violated");
    if (!(sigma_r > 0.0)) fail("hullwhite: sigma_r > 0 violated");
    if (!(R > 0.0)) fail("hullwhite: R > 0 violated");
    if (!(ref_sigma > 0.0)) fail("reference: sigma > 0 violated");
    if (std::abs(ref_xi) > 1.0) fail("reference: |xi| <= 1 violated");
    if (!(p > 2.0)) fail("reference: p > 2 violated");
    if (!(gen_sigma > 0.0)) fail("generating: sigma > 0 violated");
    if (std::abs(gen_xi) > 1.0) fail("generating: |xi| <= 1 violated");
    if (!(s0 > 0.0)) fail("instruments: s0 > 0 violated");
    if (maturity_days.empty()) fail("instruments: empty maturity list");
    if (strikes.empty()) fail("instruments: empty strike list");
    for (int d : maturity_days)
        if (d <= 0) fail("instruments: maturity_days > 0 violated");
    for (double k : strikes)
        if (!(k > 0.0)) fail("instruments: strikes > 0 violated");
    const double lz = std::log(s0);
    if (lz < z_min || lz > z_max) fail("instruments: log(s0) outside the z grid");
    if (R * r0 < r_min || R * r0 > r_max) fail("hullwhite: rescaled r0 outside the r grid");
    settings.validate();
}

SpatialGrid2D Config::make_grid() const {
    return SpatialGrid2D(z_min, z_max, r_min, r_max, n_z, n_r);
}

TimeGrid Config::make_time_grid() const {
    return TimeGrid::daily(maturity_days, steps_per_day);
}

HullWhiteParams Config::make_hull_white(const TimeGrid& tgrid) const {
    HullWhiteParams hw;
    hw.a = a;
    hw.sigma_r = sigma_r;
    hw.r0 = r0;
    hw.R = R;
    hw.b_times = tgrid.nodes;
    hw.b_nodes = hw_b_flat_fit(a, sigma_r, r0, tgrid.nodes);
    hw.validate();
    return hw;
}

ReferenceModel Config::make_reference(const SpatialGrid2D& grid, std::size_t n_time_nodes) const {
    ReferenceModel ref =
        ReferenceModel::cev(grid, n_time_nodes, ref_sigma, ref_gamma, ref_xi, sigma_r, p);
    ref.validate(sigma_r);
    return ref;
}

GeneratingModel Config::make_generating() const {
    GeneratingModel gen{gen_sigma, gen_gamma, gen_xi, settings.payoff_eps};
    gen.validate();
    return gen;
}

std::vector<Instrument> Config::make_instruments() const {
    std::vector<Instrument> out;
    out.reserve(maturity_days.size() * strikes.size());
    for (int d : maturity_days)
        for (double k : strikes)
            out.push_back(Instrument{static_cast<double>(d) / 360.0, d, k});
    return out;
}

double Config::z0() const { return std::log(s0); }

} // namespace otcal
