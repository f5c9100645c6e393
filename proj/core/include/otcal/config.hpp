#ifndef OTCAL_CONFIG_HPP
#define OTCAL_CONFIG_HPP

#include <string>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"

namespace otcal {

/// Run configuration, read from an INI file with sections [grid], [time],
/// [hullwhite], [reference], [generating], [instruments], [settings].
/// The instrument book is the cartesian product maturities x strikes.
struct Config {
    // [grid]
    double z_min = 4.0, z_max = 5.0;
    double r_min = 0.0, r_max = 5.0;
    std::size_t n_z = 100, n_r = 100;

    // [time]
    int steps_per_day = 1;

    // [hullwhite]
    double a = 0.4, sigma_r = 0.05, r0 = 0.025, R = 100.0;

    // [reference]
    double ref_sigma = 0.9, ref_gamma = 0.9, ref_xi = -0.4, p = 4.0;

    // [generating]
    double gen_sigma = 0.78, gen_gamma = 0.9, gen_xi = -0.6;

    // [instruments]
    double s0 = 92.0;
    std::vector<int> maturity_days{60, 120};
    std::vector<double> strikes{85, 92, 99, 106, 113, 120};

    // [settings]
    CalibrationSettings settings;

    static Config load(const std::string& path);
    void validate() const; // throws std::invalid_argument naming the violation

    // assembled model objects
    SpatialGrid2D make_grid() const;
    TimeGrid make_time_grid() const;
    HullWhiteParams make_hull_white(const TimeGrid& tgrid) const;
    ReferenceModel make_reference(const SpatialGrid2D& grid, std::size_t n_time_nodes) const;
    GeneratingModel make_generating() const;
    std::vector<Instrument> make_instruments() const; // prices unset

    double z0() const;
    double r0_rescaled() const { return R * r0; }
};

} // namespace otcal

#endif
