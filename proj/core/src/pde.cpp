#include "otcal/pde.hpp"

#include <cmath>
#include <lapacke.h>
#include <stdexcept>

namespace otcal {

StepCoeffs make_step_coeffs(const HullWhiteParams& hw, const Field2D& beta11,
                            const Field2D& xi_ref, double t) {
    const auto& g = beta11.grid();
    StepCoeffs c;
    c.grid = &g;
    c.cz.resize(g.size());
    c.czz.resize(g.size());
    c.czr.resize(g.size());
    c.cr.resize(g.n_r);
    c.crr.resize(g.n_r);
    c.react.resize(g.n_r);
    const double R = hw.R;
    const double srR = R * hw.sigma_r;
    for (std::size_t j = 0; j < g.n_r; ++j) {
        double rt = g.r(j); // rescaled rate
        c.cr[j] = R * hw.b(t) - hw.a * rt;
        c.crr[j] = 0.5 * srR * srR;
        c.react[j] = rt / R;
    }
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            std::size_t k = g.idx(i, j);
            c.czz[k] = 0.5 * beta11(i, j);
            c.cz[k] = g.r(j) / R - 0.5 * beta11(i, j);
            c.czr[k] = R * xi_ref(i, j) * hw.sigma_r * hw.sigma_r;
        }
    return c;
}

Field2D apply_operator(const StepCoeffs& c, const Field2D& f) {
    const auto& g = *c.grid;
    Derivs2D d = central_diffs(f);
    Field2D out(g);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            std::size_t k = g.idx(i, j);
            out(i, j) = c.cz[k] * d.f_z(i, j) + c.cr[j] * d.f_r(i, j) +
                        c.czz[k] * d.f_zz(i, j) + c.crr[j] * d.f_rr(i, j) +
                        c.czr[k] * d.f_zr(i, j) - c.react[j] * f(i, j);
        }
    return out;
}

FrozenBoundary frozen_boundary_d2(const Field2D& slice) {
    const auto& g = slice.grid();
    Field2D dzz = diff_zz(slice);
    Field2D drr = diff_rr(slice);
    FrozenBoundary fb;
    fb.dzz.assign(g.size(), 0.0);
    fb.drr.assign(g.size(), 0.0);
    for (std::size_t j = 0; j < g.n_r; ++j) {
        fb.dzz[g.idx(0, j)] = dzz(0, j);
        fb.dzz[g.idx(g.n_z - 1, j)] = dzz(g.n_z - 1, j);
    }
    for (std::size_t i = 0; i < g.n_z; ++i) {
        fb.drr[g.idx(i, 0)] = drr(i, 0);
        fb.drr[g.idx(i, g.n_r - 1)] = drr(i, g.n_r - 1);
    }
    return fb;
}

ImplicitStepSolver::ImplicitStepSolver(const SpatialGrid2D& grid) : grid_(&grid) {
    if (grid.n_z < 4 || grid.n_r < 4)
        throw std::invalid_argument("ImplicitStepSolver: need at least 4 nodes per axis");
}

Field2D ImplicitStepSolver::step(const StepCoeffs& c, const Field2D& f_next, double dt,
                                 const FrozenBoundary& frozen, const std::vector<double>& source,
                                 double lin_tol) {
    const auto& g = *grid_;
    if (!(dt > 0.0)) throw std::invalid_argument("ImplicitStepSolver: dt must be positive");
    const std::size_t n = g.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * n);
    Eigen::VectorXd rhs(n);

    const double hz = g.h_z, hr = g.h_r;
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            const std::size_t row = g.idx(i, j);
            const bool zb = (i == 0 || i == g.n_z - 1);
            const bool rb = (j == 0 || j == g.n_r - 1);
            if (zb || rb) {
                // frozen-second-derivative closure, one-sided second order
                if (zb) {
                    std::size_t i0 = (i == 0) ? 0 : g.n_z - 1;
                    auto at = [&](int off) {
                        return (i == 0) ? g.idx(i0 + off, j) : g.idx(i0 - off, j);
                    };
                    trip.emplace_back(row, at(0), 2.0 / (hz * hz));
                    trip.emplace_back(row, at(1), -5.0 / (hz * hz));
                    trip.emplace_back(row, at(2), 4.0 / (hz * hz));
                    trip.emplace_back(row, at(3), -1.0 / (hz * hz));
                }
                if (rb) {
                    std::size_t j0 = (j == 0) ? 0 : g.n_r - 1;
                    auto at = [&](int off) {
                        return (j == 0) ? g.idx(i, j0 + off) : g.idx(i, j0 - off);
                    };
                    trip.emplace_back(row, at(0), 2.0 / (hr * hr));
                    trip.emplace_back(row, at(1), -5.0 / (hr * hr));
                    trip.emplace_back(row, at(2), 4.0 / (hr * hr));
                    trip.emplace_back(row, at(3), -1.0 / (hr * hr));
                }
                rhs[row] = (zb ? frozen.dzz[row] : 0.0) + (rb ? frozen.drr[row] : 0.0);
                continue;
            }
            const double czz = c.czz[row] / (hz * hz);
            const double crr = c.crr[j] / (hr * hr);
            const double cz = c.cz[row] / (2.0 * hz);
            const double cr = c.cr[j] / (2.0 * hr);
            const double cx = c.czr[row] / (4.0 * hz * hr);
            trip.emplace_back(row, row, 1.0 / dt + c.react[j] + 2.0 * czz + 2.0 * crr);
            trip.emplace_back(row, g.idx(i + 1, j), -(czz + cz));
            trip.emplace_back(row, g.idx(i - 1, j), -(czz - cz));
            trip.emplace_back(row, g.idx(i, j + 1), -(crr + cr));
            trip.emplace_back(row, g.idx(i, j - 1), -(crr - cr));
            trip.emplace_back(row, g.idx(i + 1, j + 1), -cx);
            trip.emplace_back(row, g.idx(i - 1, j - 1), -cx);
            trip.emplace_back(row, g.idx(i + 1, j - 1), cx);
            trip.emplace_back(row, g.idx(i - 1, j + 1), cx);
            rhs[row] = f_next(i, j) / dt - (source.empty() ? 0.0 : source[row]);
        }

    if (mat_.rows() == 0) mat_.resize(n, n);
    mat_.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_) {
        lu_.analyzePattern(mat_);
        analyzed_ = true;
    }
    lu_.factorize(mat_);
    if (lu_.info() != Eigen::Success)
        throw std::runtime_error("ImplicitStepSolver: factorization failed");
    Eigen::VectorXd x = lu_.solve(rhs);
    last_residual_ = (mat_ * x - rhs).lpNorm<Eigen::Infinity>() /
                     std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    if (!(last_residual_ <= lin_tol))
        throw std::runtime_error("ImplicitStepSolver: residual " +
                                 std::to_string(last_residual_) + " exceeds tolerance");
    Field2D out(g);
    for (std::size_t k = 0; k < n; ++k) out.data()[k] = x[k];
    if (!out.all_finite()) throw std::runtime_error("ImplicitStepSolver: non-finite solution");
    return out;
}

BandedSystem::BandedSystem(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0), b_(n, 0.0),
      ipiv_(n, 0) {}

void BandedSystem::reset() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    std::fill(b_.begin(), b_.end(), 0.0);
}

void BandedSystem::add(int i, int j, double v) {
    // LAPACK band storage: AB(kl+ku+i-j, j), column-major
    ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)] += v;
}

void BandedSystem::solve() {
    lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab_.data(), ldab_,
                                    ipiv_.data(), b_.data(), n_);
    if (info != 0)
        throw std::runtime_error("BandedSystem: dgbsv failed with info " + std::to_string(info));
}

} // namespace otcal
