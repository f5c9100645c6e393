#include "otcal/calib.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <future>
#include <stdexcept>

#include "otcal/black_scholes.hpp"

namespace otcal {

ScaledInstruments vega_scale(const std::vector<Instrument>& instruments,
                             const SpatialGrid2D& grid, const TimeGrid& tgrid,
                             const HullWhiteParams& hw, double spot, double payoff_eps) {
    ScaledInstruments out;
    out.instruments = instruments;
    out.scaled_price.reserve(instruments.size());
    out.scaled_payoff.reserve(instruments.size());
    out.maturity_idx.reserve(instruments.size());
    for (auto& inst : out.instruments) {
        const double df = hw.bond_price(inst.maturity);
        const double iv = implied_vol(inst.price, spot, inst.strike, inst.maturity, df);
        inst.vega = bs_vega(spot, inst.strike, inst.maturity, iv, df);
        if (!(inst.vega > 0.0))
            throw std::runtime_error("vega_scale: nonpositive vega");
        out.scaled_price.push_back(inst.price / inst.vega);
        Field2D payoff(grid);
        for (std::size_t i = 0; i < grid.n_z; ++i) {
            const double v = smoothed_call_payoff(grid.z(i), inst.strike, payoff_eps) / inst.vega;
            for (std::size_t j = 0; j < grid.n_r; ++j) payoff(i, j) = v;
        }
        out.scaled_payoff.push_back(std::move(payoff));
        out.maturity_idx.push_back(tgrid.index_of(inst.maturity));
    }
    return out;
}

Calibrator::Calibrator(const SpatialGrid2D& grid, const TimeGrid& tgrid,
                       const HullWhiteParams& hw, ReferenceModel ref,
                       ScaledInstruments scaled, CalibrationSettings settings,
                       double z0, double r0_rescaled, GradientPricer pricer)
    : grid_(&grid), tgrid_(&tgrid), hw_(&hw), ref_(std::move(ref)),
      scaled_(std::move(scaled)), settings_(settings), z0_(z0), r0_resc_(r0_rescaled),
      pricer_(pricer) {
    ref_.validate(hw_->sigma_r);
    settings_.validate();
    if (scaled_.scaled_payoff.empty())
        throw std::invalid_argument("Calibrator: no instruments");
}

HJBSolver Calibrator::make_solver() const {
    return HJBSolver(*grid_, *tgrid_, *hw_, ref_, scaled_.scaled_payoff,
                     scaled_.maturity_idx, settings_, z0_, r0_resc_);
}

Calibrator::Eval Calibrator::dual_objective_and_gradient(const Eigen::VectorXd& lambda) const {
    const std::size_t n = scaled_.instruments.size();
    if (static_cast<std::size_t>(lambda.size()) != n)
        throw std::invalid_argument("lambda size mismatch");

    HJBSolver solver = make_solver();
    std::vector<double> lam(lambda.data(), lambda.data() + lambda.size());
    HJBSolution sol = solver.solve(lam);

    ModelSurfaces surf = ModelSurfaces::from_hjb(sol, ref_);

    std::vector<std::future<double>> prices(n);
    for (std::size_t i = 0; i < n; ++i) {
        prices[i] = std::async(std::launch::async, [this, &surf, i]() {
            const Instrument& inst = scaled_.instruments[i];
            const double strike = inst.strike;
            const double eps = settings_.payoff_eps;
            const double vega = inst.vega;
            PayoffFn payoff = [strike, eps, vega](double z, double) {
                return smoothed_call_payoff(z, strike, eps) / vega;
            };
            PriceResult pr =
                pricer_ == GradientPricer::Adi
                    ? adi_price(surf, *hw_, *tgrid_, payoff, inst.maturity, z0_, r0_resc_)
                    : implicit_price(surf, *hw_, *tgrid_, payoff, inst.maturity, z0_,
                                     r0_resc_, settings_.lin_tol);
            return pr.price;
        });
    }

    Eval ev;
    ev.grad.resize(static_cast<Eigen::Index>(n));
    double ldotu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double model = prices[i].get();
        ev.grad[static_cast<Eigen::Index>(i)] = scaled_.scaled_price[i] - model;
        ldotu += lambda[static_cast<Eigen::Index>(i)] * scaled_.scaled_price[i];
    }
    ev.L = ldotu - sol.value_at_spot;
    ev.sol = std::move(sol);
    return ev;
}

namespace {

/// Strong Wolfe line search on f(alpha) = -L(lambda + alpha d); returns the
/// accepted step and the evaluation there. Nocedal-Wright bracketing + zoom.
struct LineSearchResult {
    double alpha;
    Calibrator::Eval eval;
    bool ok;
};

LineSearchResult wolfe_search(const Calibrator& cal, const Eigen::VectorXd& lambda,
                              const Eigen::VectorXd& d, double f0, double g0,
                              double alpha_init) {
    constexpr double c1 = 1e-4, c2 = 0.9;
    constexpr int max_iter = 20;
    const auto phi = [&](double a) {
        Calibrator::Eval ev = cal.dual_objective_and_gradient(lambda + a * d);
        return std::pair<double, Calibrator::Eval>(-ev.L, std::move(ev));
    };
    const auto dphi = [&](const Calibrator::Eval& ev) { return -ev.grad.dot(d); };

    double a_prev = 0.0, f_prev = f0, g_prev = g0;
    double a = alpha_init;
    Calibrator::Eval ev_prev; // unused at alpha = 0

    auto zoom = [&](double lo, double f_lo, double g_lo, Calibrator::Eval ev_lo, double hi,
                    double f_hi) -> LineSearchResult {
        for (int it = 0; it < max_iter; ++it) {
            // quadratic interpolation with bisection safeguard
            double at = lo - 0.5 * g_lo * (hi - lo) * (hi - lo) /
                                 (f_hi - f_lo - g_lo * (hi - lo));
            const double lo_a = std::min(lo, hi), hi_a = std::max(lo, hi);
            if (!(at > lo_a + 0.1 * (hi_a - lo_a) && at < hi_a - 0.1 * (hi_a - lo_a)))
                at = 0.5 * (lo + hi);
            auto [ft, evt] = phi(at);
            if (ft > f0 + c1 * at * g0 || ft >= f_lo) {
                hi = at;
                f_hi = ft;
            } else {
                const double gt = dphi(evt);
                if (std::abs(gt) <= -c2 * g0) return {at, std::move(evt), true};
                if (gt * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                }
                lo = at;
                f_lo = ft;
                g_lo = gt;
                ev_lo = std::move(evt);
            }
        }
        return {lo, std::move(ev_lo), true}; // best sufficient-decrease point seen
    };

    for (int it = 0; it < max_iter; ++it) {
        auto [f, ev] = phi(a);
        if (f > f0 + c1 * a * g0 || (it > 0 && f >= f_prev))
            return zoom(a_prev, f_prev, g_prev, std::move(ev_prev), a, f);
        const double g = dphi(ev);
        if (std::abs(g) <= -c2 * g0) return {a, std::move(ev), true};
        if (g >= 0.0) return zoom(a, f, g, std::move(ev), a_prev, f_prev);
        a_prev = a;
        f_prev = f;
        g_prev = g;
        ev_prev = std::move(ev);
        a *= 2.0;
    }
    return {a_prev, std::move(ev_prev), a_prev > 0.0};
}

} // namespace

DualState Calibrator::lbfgs_minimize(const Eigen::VectorXd& lambda0, const TraceFn& trace) const {
    const auto t_start = std::chrono::steady_clock::now();
    const auto wall_ms = [&]() {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t_start)
            .count();
    };

    DualState st;
    st.lambda = lambda0;
    Eval ev = dual_objective_and_gradient(st.lambda);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    const int m = settings_.lbfgs_memory;

    for (int iter = 0; iter < settings_.max_outer; ++iter) {
        const double gnorm = ev.grad.lpNorm<Eigen::Infinity>();
        if (trace) trace(iter, ev.L, gnorm, wall_ms());
        if (gnorm < settings_.eps1) {
            st.converged = true;
            break;
        }

        // two-loop recursion on the negated gradient (we minimize -L)
        Eigen::VectorXd q = -ev.grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const auto& s = s_hist.back();
            const auto& y = y_hist.back();
            q *= s.dot(y) / y.squaredNorm();
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd d = -q; // descent direction for -L

        double g0 = -ev.grad.dot(d); // directional derivative of -L
        if (g0 >= 0.0) {             // not a descent direction; reset to steepest
            d = ev.grad;
            g0 = -ev.grad.dot(d);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / std::max(gnorm, 1e-12)) : 1.0;
        LineSearchResult ls = wolfe_search(*this, st.lambda, d, -ev.L, g0, alpha0);
        if (!ls.ok || ls.alpha <= 0.0) break; // line search failed; report as-is

        const Eigen::VectorXd lambda_new = st.lambda + ls.alpha * d;
        const Eigen::VectorXd s = lambda_new - st.lambda;
        const Eigen::VectorXd y = -(ls.eval.grad - ev.grad); // gradient of -L
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > m) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        st.lambda = lambda_new;
        ev = std::move(ls.eval);
        st.iterations = iter + 1;
    }

    if (!st.converged && ev.grad.lpNorm<Eigen::Infinity>() < settings_.eps1)
        st.converged = true;
    st.L = ev.L;
    st.grad = ev.grad;
    if (trace) trace(st.iterations, st.L, st.grad.lpNorm<Eigen::Infinity>(), wall_ms());
    return st;
}

Calibrator::Result Calibrator::smooth_and_recalibrate(int epochs, const TraceFn& trace,
                                                      const EpochFn& on_epoch) {
    const std::size_t n = scaled_.instruments.size();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

    DualState st = lbfgs_minimize(lambda, trace);
    Result res;
    for (int e = 0; e <= epochs; ++e) {
        Eval ev = dual_objective_and_gradient(st.lambda);
        ModelSurfaces surf = ModelSurfaces::from_hjb(ev.sol, ref_);
        if (on_epoch) on_epoch(e, surface_total_variation(surf.beta11), st);
        if (e == epochs) {
            st.L = ev.L;
            st.grad = ev.grad;
            res.surfaces = std::move(surf);
            break;
        }

        // smoothed beta11 becomes the next reference vol, floored above the
        // penalty pole s = xi_ref^2 sigma_r^2; xi_ref is carried over
        const double sr2 = hw_->sigma_r * hw_->sigma_r;
        for (std::size_t k = 0; k < surf.beta11.size(); ++k) {
            Field2D sm = spline_smooth(surf.beta11[k], settings_.spline_stride);
            const Field2D& xi = ref_.xi_ref[k];
            for (std::size_t i = 0; i < grid_->n_z; ++i)
                for (std::size_t j = 0; j < grid_->n_r; ++j) {
                    const double pole = xi(i, j) * xi(i, j) * sr2;
                    sm(i, j) = std::max(sm(i, j), pole * (1.0 + 1e-3) + 1e-6);
                }
            ref_.sigma_bar_sq[k] = std::move(sm);
        }
        st = lbfgs_minimize(st.lambda, trace);
    }

    res.state = std::move(st);
    res.epochs_run = epochs;
    return res;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("CubicSpline: bad input");
    m_.assign(n, 0.0);
    if (n == 2) return;
    // tridiagonal solve for interior second derivatives (natural ends)
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        sub[i] = hl;
        diag[i] = 2.0 * (hl + hr);
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * (x_[i] - x_[i - 1]);
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        const double upper = (i + 2 < n) ? (x_[i + 1] - x_[i]) * m_[i + 1] : 0.0;
        m_[i] = (rhs[i] - upper) / diag[i];
        if (i == 1) break;
    }
}

double CubicSpline::operator()(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front()) { // linear extrapolation with the end slope
        const double h = x_[1] - x_[0];
        const double slope = (y_[1] - y_[0]) / h - h * (2.0 * m_[0] + m_[1]) / 6.0;
        return y_[0] + slope * (x - x_[0]);
    }
    if (x >= x_.back()) {
        const double h = x_[n - 1] - x_[n - 2];
        const double slope = (y_[n - 1] - y_[n - 2]) / h + h * (m_[n - 2] + 2.0 * m_[n - 1]) / 6.0;
        return y_[n - 1] + slope * (x - x_[n - 1]);
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

namespace {

std::vector<std::size_t> subsample_indices(std::size_t n, int stride) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(stride)) idx.push_back(i);
    if (idx.back() != n - 1) idx.push_back(n - 1);
    return idx;
}

} // namespace

Field2D spline_smooth(const Field2D& f, int stride) {
    const SpatialGrid2D& g = f.grid();
    if (stride < 1) throw std::invalid_argument("spline_smooth: stride < 1");

    Field2D mid(g);
    const auto zi = subsample_indices(g.n_z, stride);
    std::vector<double> xs(zi.size()), ys(zi.size());
    for (std::size_t j = 0; j < g.n_r; ++j) {
        for (std::size_t q = 0; q < zi.size(); ++q) {
            xs[q] = g.z(zi[q]);
            ys[q] = f(zi[q], j);
        }
        CubicSpline sp(xs, ys);
        for (std::size_t i = 0; i < g.n_z; ++i) mid(i, j) = sp(g.z(i));
    }

    Field2D out(g);
    const auto rj = subsample_indices(g.n_r, stride);
    std::vector<double> xr(rj.size()), yr(rj.size());
    for (std::size_t i = 0; i < g.n_z; ++i) {
        for (std::size_t q = 0; q < rj.size(); ++q) {
            xr[q] = g.r(rj[q]);
            yr[q] = mid(i, rj[q]);
        }
        CubicSpline sp(xr, yr);
        for (std::size_t j = 0; j < g.n_r; ++j) out(i, j) = sp(g.r(j));
    }
    return out;
}

double surface_total_variation(const std::vector<Field2D>& slices) {
    double tv = 0.0;
    for (const auto& f : slices) {
        const SpatialGrid2D& g = f.grid();
        for (std::size_t i = 0; i < g.n_z; ++i)
            for (std::size_t j = 0; j < g.n_r; ++j) {
                if (i + 1 < g.n_z) tv += std::abs(f(i + 1, j) - f(i, j));
                if (j + 1 < g.n_r) tv += std::abs(f(i, j + 1) - f(i, j));
            }
    }
    return tv;
}

} // namespace otcal
