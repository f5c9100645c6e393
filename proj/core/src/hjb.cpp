#include "otcal/hjb.hpp"

#include <cmath>
#include <stdexcept>

#include "otcal/cost.hpp"

namespace otcal {

Field2D apply_jump(const Field2D& phi, const std::vector<double>& lambda,
                   const std::vector<Field2D>& payoffs,
                   const std::vector<std::size_t>& expiring) {
    Field2D out = phi;
    for (std::size_t i : expiring) {
        if (i >= lambda.size() || i >= payoffs.size())
            throw std::out_of_range("apply_jump: instrument index out of range");
        for (std::size_t k = 0; k < out.size(); ++k)
            out.data()[k] += lambda[i] * payoffs[i].data()[k];
    }
    return out;
}

HJBSolver::HJBSolver(const SpatialGrid2D& grid, const TimeGrid& tgrid,
                     const HullWhiteParams& hw, const ReferenceModel& ref,
                     std::vector<Field2D> payoffs,
                     std::vector<std::size_t> instrument_maturity_idx,
                     CalibrationSettings settings, double z0, double r0_rescaled)
    : grid_(&grid), tgrid_(&tgrid), hw_(&hw), ref_(&ref), payoffs_(std::move(payoffs)),
      payoff_maturity_idx_(std::move(instrument_maturity_idx)), settings_(settings),
      z0_(z0), r0_resc_(r0_rescaled) {
    hw.validate();
    ref.validate(hw.sigma_r);
    settings.validate();
    if (payoffs_.size() != payoff_maturity_idx_.size())
        throw std::invalid_argument("HJBSolver: payoff/maturity count mismatch");
    if (ref.sigma_bar_sq.size() != tgrid.nodes.size())
        throw std::invalid_argument("HJBSolver: reference slices must match time nodes");
    for (std::size_t m : payoff_maturity_idx_)
        if (!tgrid.is_maturity(m))
            throw std::invalid_argument("HJBSolver: instrument maturity not a marked node");
}

Field2D HJBSolver::beta_from_phi(const Field2D& phi, std::size_t k) const {
    const auto& xbar = ref_->sigma_bar_sq[k];
    const auto& xi = ref_->xi_ref[k];
    Field2D g_field = diff_zz(phi);
    Field2D phz = diff_z(phi);
    Field2D beta(*grid_);
    const double sr2 = hw_->sigma_r * hw_->sigma_r;
    for (std::size_t m = 0; m < beta.size(); ++m) {
        double g = g_field.data()[m] - phz.data()[m];
        double s = xi.data()[m] * xi.data()[m] * sr2;
        beta.data()[m] = optimal_beta11(g, xbar.data()[m], s, ref_->p);
    }
    return beta;
}

std::vector<double> HJBSolver::source_from_beta(const Field2D& beta11, std::size_t k) const {
    const auto& xbar = ref_->sigma_bar_sq[k];
    const auto& xi = ref_->xi_ref[k];
    const double sr2 = hw_->sigma_r * hw_->sigma_r;
    std::vector<double> src(beta11.size());
    for (std::size_t m = 0; m < src.size(); ++m) {
        double s = xi.data()[m] * xi.data()[m] * sr2;
        src[m] = penalty_H(beta11.data()[m], xbar.data()[m], s, ref_->p);
    }
    return src;
}

Field2D HJBSolver::implicit_step(const Field2D& phi_next, const Field2D& beta11,
                                 std::size_t k, double dt,
                                 const FrozenBoundary& frozen_d2) const {
    ImplicitStepSolver solver(*grid_);
    StepCoeffs c = make_step_coeffs(*hw_, beta11, ref_->xi_ref[k], tgrid_->nodes[k]);
    return solver.step(c, phi_next, dt, frozen_d2, source_from_beta(beta11, k),
                       settings_.lin_tol);
}

double HJBSolver::discrete_residual(const Field2D& phi_k, const Field2D& phi_next,
                                    const Field2D& beta11, std::size_t k, double dt) const {
    StepCoeffs c = make_step_coeffs(*hw_, beta11, ref_->xi_ref[k], tgrid_->nodes[k]);
    Field2D Lphi = apply_operator(c, phi_k);
    std::vector<double> H = source_from_beta(beta11, k);
    const auto& g = *grid_;
    double res = 0.0;
    for (std::size_t i = 1; i + 1 < g.n_z; ++i)
        for (std::size_t j = 1; j + 1 < g.n_r; ++j) {
            std::size_t m = g.idx(i, j);
            double v = (phi_next(i, j) - phi_k(i, j)) / dt + Lphi(i, j) - H[m];
            res = std::max(res, std::abs(v));
        }
    return res;
}

HJBSolver::PolicyResult HJBSolver::policy_iteration_step_solve(
    const Field2D& phi_next, std::size_t k, double dt,
    const FrozenBoundary& frozen_d2, ImplicitStepSolver& solver) const {
    Field2D phi = phi_next; // Algorithm start: previous time step as the guess
    Field2D beta(*grid_);
    double change = std::numeric_limits<double>::infinity();
    int it = 0;
    while (change > settings_.eps2) {
        if (++it > settings_.max_policy_iter)
            throw std::runtime_error("policy iteration: no convergence at t_k index " +
                                     std::to_string(k) + ", last update " +
                                     std::to_string(change));
        beta = beta_from_phi(phi, k);
        StepCoeffs c = make_step_coeffs(*hw_, beta, ref_->xi_ref[k], tgrid_->nodes[k]);
        Field2D phi_new =
            solver.step(c, phi_next, dt, frozen_d2, source_from_beta(beta, k), settings_.lin_tol);
        change = Field2D::sup_diff(phi_new, phi);
        phi = std::move(phi_new);
    }
    return {std::move(phi), std::move(beta), it};
}

HJBSolution HJBSolver::solve(const std::vector<double>& lambda) const {
    const auto& tg = *tgrid_;
    const std::size_t N = tg.n_steps();
    HJBSolution sol;
    sol.phi.resize(N + 1, Field2D(*grid_));
    sol.beta11.resize(N + 1, Field2D(*grid_));

    ImplicitStepSolver solver(*grid_);
    Field2D phi(*grid_); // phi(T) = 0 before the final jump
    sol.phi[N] = phi;
    FrozenBoundary frozen = frozen_boundary_d2(phi);

    for (std::size_t kk = N; kk-- > 0;) {
        const std::size_t k = kk;
        if (tg.is_maturity(k + 1)) {
            std::vector<std::size_t> expiring;
            for (std::size_t i = 0; i < payoff_maturity_idx_.size(); ++i)
                if (payoff_maturity_idx_[i] == k + 1) expiring.push_back(i);
            phi = apply_jump(phi, lambda, payoffs_, expiring);
            // boundary closure: second derivatives frozen at the post-jump slice
            // until the next maturity (backwards)
            frozen = frozen_boundary_d2(phi);
        }
        PolicyResult pr = policy_iteration_step_solve(phi, k, tg.dt(k), frozen, solver);
        phi = std::move(pr.phi);
        sol.phi[k] = phi;
        sol.beta11[k] = std::move(pr.beta11);
        if (!dump_dir_.empty()) {
            sol.phi[k].write_csv_file(dump_dir_ + "/phi_t" + std::to_string(k) + ".csv");
            sol.beta11[k].write_csv_file(dump_dir_ + "/beta11_t" + std::to_string(k) + ".csv");
        }
    }
    sol.beta11[N] = sol.beta11[N - 1];
    sol.value_at_spot = sol.phi[0].interp(z0_, r0_resc_);
    return sol;
}

} // namespace otcal
