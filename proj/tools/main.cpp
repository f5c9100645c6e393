// otcal command-line driver: synthetic market generation, calibration,
// pricing, simulation, report assembly.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otcal/black_scholes.hpp"
#include "otcal/calib.hpp"
#include "otcal/config.hpp"
#include "otcal/pricing.hpp"
#include "otcal/validate.hpp"

namespace fs = std::filesystem;
using namespace otcal;

namespace {

int g_verbosity = 1;

void say(const std::string& msg) {
    if (g_verbosity > 0) std::cout << msg << "\n";
}

struct Setup {
    Config cfg;
    SpatialGrid2D grid;
    TimeGrid tgrid;
    HullWhiteParams hw;

    explicit Setup(const Config& c)
        : cfg(c), grid(c.make_grid()), tgrid(c.make_time_grid()),
          hw(c.make_hull_white(tgrid)) {}
};

double price_call(const Setup& s, const ModelSurfaces& surf, double strike, double maturity) {
    PayoffFn payoff = [strike](double z, double) { return call_payoff(z, strike); };
    return adi_price(surf, s.hw, s.tgrid, payoff, maturity, s.cfg.z0(), s.cfg.r0_rescaled())
        .price;
}

double iv_of(const Setup& s, double price, double strike, double maturity) {
    return implied_vol(price, s.cfg.s0, strike, maturity, s.hw.bond_price(maturity));
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot open " + (dir / name).string());
    os.precision(10);
    return os;
}

void write_market(const fs::path& dir, const Setup& s, const std::vector<Instrument>& book) {
    auto os = open_out(dir, "market.csv");
    os << "maturity_days,strike,price,implied_vol\n";
    for (const auto& inst : book)
        os << inst.maturity_days << "," << inst.strike << "," << inst.price << ","
           << iv_of(s, inst.price, inst.strike, inst.maturity) << "\n";
}

std::vector<Instrument> read_market(const fs::path& path, const Config& cfg) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("market file not found: " + path.string());
    std::vector<Instrument> book = cfg.make_instruments();
    std::string line;
    std::getline(is, line); // header
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int days;
        double strike, price, iv;
        if (!(ls >> days >> strike >> price >> iv))
            throw std::invalid_argument("market file: bad row " + std::to_string(row));
        if (row >= book.size()) throw std::invalid_argument("market file: too many rows");
        if (days != book[row].maturity_days || std::abs(strike - book[row].strike) > 1e-9)
            throw std::invalid_argument("market file inconsistent with configured instruments");
        book[row].price = price;
        ++row;
    }
    if (row != book.size()) throw std::invalid_argument("market file: missing rows");
    return book;
}

std::vector<Instrument> generate_market(const Setup& s) {
    ModelSurfaces surf =
        ModelSurfaces::from_generating(s.grid, s.tgrid, s.cfg.make_generating(), s.hw);
    std::vector<Instrument> book = s.cfg.make_instruments();
    for (auto& inst : book) {
        inst.price = price_call(s, surf, inst.strike, inst.maturity);
        say("  priced " + std::to_string(inst.maturity_days) + "d K=" +
            std::to_string(inst.strike) + " -> " + std::to_string(inst.price));
    }
    return book;
}

struct CalibOutput {
    Calibrator::Result result;
    std::vector<Instrument> book;
};

CalibOutput run_calibration(const Setup& s, const std::vector<Instrument>& book, int epochs,
                            const fs::path& out_dir) {
    ScaledInstruments scaled = vega_scale(book, s.grid, s.tgrid, s.hw, s.cfg.s0,
                                          s.cfg.settings.payoff_eps);
    ReferenceModel ref = s.cfg.make_reference(s.grid, s.tgrid.nodes.size());
    Calibrator cal(s.grid, s.tgrid, s.hw, std::move(ref), std::move(scaled), s.cfg.settings,
                   s.cfg.z0(), s.cfg.r0_rescaled());

    auto trace_os = open_out(out_dir, "trace.csv");
    trace_os << "iteration,dual_value,grad_sup_norm,wall_ms\n";
    TraceFn trace = [&](int it, double L, double g, double ms) {
        trace_os << it << "," << L << "," << g << "," << ms << "\n";
        if (g_verbosity > 1)
            std::cout << "  iter " << it << "  L=" << L << "  |grad|=" << g << "\n";
    };

    CalibOutput out{cal.smooth_and_recalibrate(epochs, trace), book};

    auto lam_os = open_out(out_dir, "lambda.csv");
    lam_os << "maturity_days,strike,lambda\n";
    for (std::size_t i = 0; i < book.size(); ++i)
        lam_os << book[i].maturity_days << "," << book[i].strike << ","
               << out.result.state.lambda[static_cast<Eigen::Index>(i)] << "\n";

    auto rep_os = open_out(out_dir, "report.csv");
    rep_os << "maturity_days,strike,market_price,model_price,market_iv,model_iv,iv_gap\n";
    for (const auto& inst : book) {
        const double model = price_call(s, out.result.surfaces, inst.strike, inst.maturity);
        const double miv = iv_of(s, inst.price, inst.strike, inst.maturity);
        const double civ = iv_of(s, model, inst.strike, inst.maturity);
        rep_os << inst.maturity_days << "," << inst.strike << "," << inst.price << "," << model
               << "," << miv << "," << civ << "," << civ - miv << "\n";
    }

    for (std::size_t k = 0; k < out.result.surfaces.beta11.size(); ++k)
        out.result.surfaces.beta11[k].write_csv_file(
            (out_dir / ("beta11_t" + std::to_string(k) + ".csv")).string());
    return out;
}

void write_skews(const Setup& s, const ModelSurfaces& calibrated, const fs::path& out_dir) {
    ModelSurfaces gen =
        ModelSurfaces::from_generating(s.grid, s.tgrid, s.cfg.make_generating(), s.hw);
    ModelSurfaces ref =
        ModelSurfaces::from_reference(s.cfg.make_reference(s.grid, s.tgrid.nodes.size()));
    const double k_lo = *std::min_element(s.cfg.strikes.begin(), s.cfg.strikes.end());
    const double k_hi = *std::max_element(s.cfg.strikes.begin(), s.cfg.strikes.end());
    for (int days : s.cfg.maturity_days) {
        const double T = days / 365.0;
        auto os = open_out(out_dir, "skew_" + std::to_string(days) + ".csv");
        os << "strike,generating_iv,reference_iv,calibrated_iv\n";
        for (int q = 0; q <= 14; ++q) {
            const double K = k_lo + (k_hi - k_lo) * q / 14.0;
            os << K << "," << iv_of(s, price_call(s, gen, K, T), K, T) << ","
               << iv_of(s, price_call(s, ref, K, T), K, T) << ","
               << iv_of(s, price_call(s, calibrated, K, T), K, T) << "\n";
        }
        say("  wrote skew_" + std::to_string(days) + ".csv");
    }
}

void run_simulate(const Setup& s, std::uint64_t seed, std::size_t n_paths,
                  const fs::path& out_dir) {
    ModelSurfaces surf =
        ModelSurfaces::from_generating(s.grid, s.tgrid, s.cfg.make_generating(), s.hw);
    PathBatch batch = euler_simulate(surf, s.hw, s.tgrid, n_paths, s.cfg.z0(),
                                     s.cfg.r0_rescaled(), seed);
    if (batch.clamp_fraction() > 1e-3)
        std::cerr << "warning: " << batch.clamp_fraction() * 100.0
                  << "% of lookups clamped (grid or correlation)\n";

    auto paths_os = open_out(out_dir, "paths_sample.csv");
    paths_os << "t,path_id,S,r\n";
    const std::size_t n_show = std::min<std::size_t>(100, batch.n_paths);
    for (std::size_t k = 0; k < batch.times.size(); ++k)
        for (std::size_t p = 0; p < n_show; ++p)
            paths_os << batch.times[k] << "," << p << "," << std::exp(batch.Z[k][p]) << ","
                     << batch.r[k][p] / s.hw.R << "\n";

    std::vector<TestFunction> fns;
    const double z0 = s.cfg.z0(), r0 = s.cfg.r0_rescaled();
    fns.push_back(gaussian_bump("atm", z0, r0, 0.15, 0.8));
    fns.push_back(gaussian_bump("up", z0 + 0.15, r0, 0.12, 0.8));
    fns.push_back(gaussian_bump("down", z0 - 0.15, r0, 0.12, 0.8));
    fns.push_back(gaussian_bump("rate_up", z0, r0 + 1.0, 0.15, 0.6));
    fns.push_back(gaussian_bump("wide", z0, r0, 0.3, 1.5));

    const std::size_t N = batch.n_steps();
    std::vector<std::size_t> steps{N / 5, 2 * N / 5, 3 * N / 5, 4 * N / 5};
    auto rows = discounted_fp_residual(batch, surf, s.hw, fns, steps);
    auto fp_os = open_out(out_dir, "density_check.csv");
    fp_os << "t,testfn_id,lhs,rhs,err_bar\n";
    for (const auto& row : rows)
        fp_os << row.t << "," << row.testfn_id << "," << row.lhs << "," << row.rhs << ","
              << row.err_bar << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-volatility calibration under a Hull-White rate via "
                 "semimartingale optimal transport"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path, grid_override;
    std::string out_dir = "./out";
    int epochs = -1;
    std::uint64_t seed = 20260826;
    std::size_t n_paths = 100000;
    bool quiet = false, verbose = false;

    app.add_option("--config", config_path, "configuration file (INI)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--grid", grid_override, "grid override, NxM");
    app.add_option("--epochs", epochs, "smoothing epochs override");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--paths", n_paths, "Monte-Carlo path count");
    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_flag("--verbose", verbose, "per-iteration progress");

    auto* cmd_gen = app.add_subcommand("gen-data", "price the instrument book under the "
                                                   "generating model, write market.csv");
    auto* cmd_cal = app.add_subcommand("calibrate", "calibrate to market.csv");
    auto* cmd_price = app.add_subcommand("price", "price the book under generating and "
                                                  "reference models");
    auto* cmd_sim = app.add_subcommand("simulate", "simulate paths, check the discounted "
                                                   "Fokker-Planck identity");
    auto* cmd_rep = app.add_subcommand("report", "full pipeline: gen-data, calibrate, skews");

    std::string market_path;
    cmd_cal->add_option("--market", market_path, "market CSV (default <out>/market.csv)");
    cmd_rep->add_option("--market", market_path, "market CSV (regenerated if absent)");

    CLI11_PARSE(app, argc, argv);
    g_verbosity = quiet ? 0 : (verbose ? 2 : 1);

    try {
        Config cfg = Config::load(config_path);
        if (!grid_override.empty()) {
            const auto x = grid_override.find('x');
            if (x == std::string::npos) throw std::invalid_argument("--grid expects NxM");
            cfg.n_z = std::stoul(grid_override.substr(0, x));
            cfg.n_r = std::stoul(grid_override.substr(x + 1));
            cfg.validate();
        }
        if (epochs >= 0) cfg.settings.smoothing_epochs = epochs;
        Setup s(cfg);
        const fs::path out(out_dir);

        if (*cmd_gen) {
            say("generating market data");
            write_market(out, s, generate_market(s));
        } else if (*cmd_cal) {
            const fs::path mkt = market_path.empty() ? out / "market.csv" : fs::path(market_path);
            say("calibrating to " + mkt.string());
            auto co = run_calibration(s, read_market(mkt, cfg), cfg.settings.smoothing_epochs,
                                      out);
            if (!co.result.state.converged) {
                std::cerr << "calibration did not converge: |grad| = "
                          << co.result.state.grad.lpNorm<Eigen::Infinity>() << "\n";
                return 2;
            }
            say("converged, dual value " + std::to_string(co.result.state.L));
        } else if (*cmd_price) {
            ModelSurfaces gen =
                ModelSurfaces::from_generating(s.grid, s.tgrid, cfg.make_generating(), s.hw);
            ModelSurfaces ref = ModelSurfaces::from_reference(
                cfg.make_reference(s.grid, s.tgrid.nodes.size()));
            auto os = open_out(out, "prices.csv");
            os << "model,maturity_days,strike,price,implied_vol\n";
            for (const auto& inst : cfg.make_instruments())
                for (const auto* m : {&gen, &ref}) {
                    const double pz = price_call(s, *m, inst.strike, inst.maturity);
                    os << (m == &gen ? "generating" : "reference") << ","
                       << inst.maturity_days << "," << inst.strike << "," << pz << ","
                       << iv_of(s, pz, inst.strike, inst.maturity) << "\n";
                }
        } else if (*cmd_sim) {
            say("simulating " + std::to_string(n_paths) + " paths");
            run_simulate(s, seed, n_paths, out);
        } else if (*cmd_rep) {
            say("full report pipeline");
            std::vector<Instrument> book;
            const fs::path mkt = market_path.empty() ? out / "market.csv" : fs::path(market_path);
            if (fs::exists(mkt)) {
                book = read_market(mkt, cfg);
            } else {
                book = generate_market(s);
                write_market(out, s, book);
            }
            auto co = run_calibration(s, book, cfg.settings.smoothing_epochs, out);
            write_skews(s, co.result.surfaces, out);
            if (!co.result.state.converged) return 2;
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
}
