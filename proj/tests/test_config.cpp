#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "otcal/config.hpp"

using namespace otcal;

namespace {

std::string write_temp(const std::string& body) {
    std::string path = std::string(std::tmpnam(nullptr)) + ".ini";
    std::ofstream os(path);
    os << body;
    return path;
}

const char* kGood = R"(
[grid]
z_min = 4.0
z_max = 5.0
r_min = 0.0
r_max = 5.0
n_z = 60
n_r = 40

[time]
steps_per_day = 1

[hullwhite]
a = 0.4
sigma_r = 0.05
r0 = 0.025
R = 100

[reference]
sigma = 0.9
gamma = 0.9
xi = -0.4
p = 4

[generating]
sigma = 0.78
gamma = 0.9
xi = -0.6
payoff_eps = 0.5

[instruments]
s0 = 92
maturity_days = 60 120
strikes = 85 92 99 106 113 120

[settings]
eps1 = 1e-4
smoothing_epochs = 10
)";

} // namespace

TEST_CASE("config loads an ini and assembles the models") {
    std::string path = write_temp(kGood);
    Config cfg = Config::load(path);
    std::remove(path.c_str());
    cfg.validate();
    CHECK(cfg.n_z == 60);
    CHECK(cfg.n_r == 40);
    CHECK(cfg.gen_sigma == doctest::Approx(0.78));
    CHECK(cfg.ref_xi == doctest::Approx(-0.4));
    CHECK(cfg.z0() == doctest::Approx(std::log(92.0)));
    CHECK(cfg.r0_rescaled() == doctest::Approx(2.5));

    SpatialGrid2D grid = cfg.make_grid();
    CHECK(grid.n_z == 60);
    TimeGrid tg = cfg.make_time_grid();
    CHECK(tg.maturity_idx.size() == 2);
    HullWhiteParams hw = cfg.make_hull_white(tg);
    CHECK(hw.bond_price(60.0 / 360.0) ==
          doctest::Approx(std::exp(-0.025 * 60.0 / 360.0)).epsilon(1e-8));

    auto book = cfg.make_instruments();
    REQUIRE(book.size() == 12);
    CHECK(book[0].maturity == doctest::Approx(60.0 / 360.0));
    CHECK(book[0].strike == 85.0);
    CHECK(book[11].maturity == doctest::Approx(120.0 / 360.0));
    CHECK(book[11].strike == 120.0);

    ReferenceModel ref = cfg.make_reference(grid, tg.nodes.size());
    CHECK_NOTHROW(ref.validate(cfg.sigma_r));
}

TEST_CASE("defaults reproduce the standard setup") {
    Config cfg;
    cfg.validate();
    CHECK(cfg.make_instruments().size() == 12);
    CHECK(cfg.a == 0.4);
    CHECK(cfg.p == 4.0);
}

TEST_CASE("validation names the offending field") {
    Config cfg;
    cfg.sigma_r = -0.1;
    try {
        cfg.validate();
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("sigma_r") != std::string::npos);
    }
    Config cfg2;
    cfg2.ref_xi = 2.0;
    CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
    Config cfg3;
    cfg3.strikes.clear();
    CHECK_THROWS_AS(cfg3.validate(), std::invalid_argument);
}

TEST_CASE("load rejects a missing file") {
    CHECK_THROWS(Config::load("/nonexistent/path.ini"));
}
