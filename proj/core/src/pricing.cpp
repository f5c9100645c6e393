#include "otcal/pricing.hpp"

#include <cmath>
#include <stdexcept>

#include "otcal/pde.hpp"

namespace otcal {

ModelSurfaces ModelSurfaces::from_generating(const SpatialGrid2D& grid, const TimeGrid& tgrid,
                                             const GeneratingModel& gen,
                                             const HullWhiteParams& hw) {
    gen.validate();
    Field2D beta(grid), xi(grid);
    for (std::size_t i = 0; i < grid.n_z; ++i) {
        double lv = cev_local_variance(grid.z(i), gen.sigma, gen.gamma);
        double xr = gen.xi * std::sqrt(lv) / hw.sigma_r;
        for (std::size_t j = 0; j < grid.n_r; ++j) {
            beta(i, j) = lv;
            xi(i, j) = xr;
        }
    }
    ModelSurfaces s;
    s.beta11.assign(tgrid.nodes.size(), beta);
    s.xi_ref.assign(tgrid.nodes.size(), xi);
    return s;
}

ModelSurfaces ModelSurfaces::from_reference(const ReferenceModel& ref) {
    return {ref.sigma_bar_sq, ref.xi_ref};
}

ModelSurfaces ModelSurfaces::from_hjb(const HJBSolution& sol, const ReferenceModel& ref) {
    return {sol.beta11, ref.xi_ref};
}

void ModelSurfaces::validate(const HullWhiteParams& hw, const TimeGrid& tgrid) const {
    if (beta11.size() != tgrid.nodes.size() || xi_ref.size() != tgrid.nodes.size())
        throw std::invalid_argument("ModelSurfaces: slices must align with time nodes");
    const double sr2 = hw.sigma_r * hw.sigma_r;
    for (std::size_t k = 0; k < beta11.size(); ++k)
        for (std::size_t m = 0; m < beta11[k].size(); ++m) {
            double b11 = beta11[k].data()[m];
            double b12 = xi_ref[k].data()[m] * sr2;
            if (!(b11 > 0.0))
                throw std::invalid_argument("ModelSurfaces: beta11 must be positive");
            if (b11 * sr2 < b12 * b12 * (1.0 - 1e-12))
                throw std::invalid_argument("ModelSurfaces: covariance not PSD");
        }
}

namespace {

Field2D sample_payoff(const SpatialGrid2D& g, const PayoffFn& payoff) {
    Field2D f(g);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) f(i, j) = payoff(g.z(i), g.r(j));
    if (!f.all_finite()) throw std::invalid_argument("price: non-finite payoff on grid");
    return f;
}

// 1-D convection-diffusion pieces of the operator, central stencils in the
// interior and second-order one-sided rows at the ends.
Field2D apply_a1(const StepCoeffs& c, const Field2D& f) {
    const auto& g = *c.grid;
    Field2D dz = diff_z(f), dzz = diff_zz(f);
    Field2D out(g);
    for (std::size_t m = 0; m < out.size(); ++m)
        out.data()[m] = c.cz[m] * dz.data()[m] + c.czz[m] * dzz.data()[m];
    return out;
}

Field2D apply_a2(const StepCoeffs& c, const Field2D& f) {
    const auto& g = *c.grid;
    Field2D out(g);
    Field2D drr = diff_rr(f);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j) {
            double dr;
            if (j == 0)
                dr = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * g.h_r);
            else if (j == g.n_r - 1)
                dr = (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * g.h_r);
            else
                dr = (f(i, j + 1) - f(i, j - 1)) / (2.0 * g.h_r);
            out(i, j) = c.cr[j] * dr + c.crr[j] * drr(i, j);
        }
    return out;
}

} // namespace

PriceResult adi_price(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                      const TimeGrid& tgrid, const PayoffFn& payoff, double maturity,
                      double z0, double r0_rescaled) {
    const auto& g = surfaces.beta11.front().grid();
    const std::size_t kmat = tgrid.index_of(maturity);
    Field2D psi = sample_payoff(g, payoff);
    const FrozenBoundary frozen = frozen_boundary_d2(psi);

    const int nz = static_cast<int>(g.n_z), nr = static_cast<int>(g.n_r);
    BandedSystem zline(nz, 3, 3), rline(nr, 3, 3);

    for (std::size_t kk = kmat; kk-- > 0;) {
        const std::size_t k = kk;
        const double dt = tgrid.dt(k);
        const double th = 0.5 * dt;
        StepCoeffs c = make_step_coeffs(hw, surfaces.beta11[k], surfaces.xi_ref[k],
                                        tgrid.nodes[k]);
        Field2D a1_old = apply_a1(c, psi);
        Field2D a2_old = apply_a2(c, psi);
        Field2D full = apply_operator(c, psi);

        // predictor: whole operator explicit
        Field2D y0(g);
        for (std::size_t m = 0; m < y0.size(); ++m)
            y0.data()[m] = psi.data()[m] + dt * full.data()[m];

        // z sweep: (I - th A1) y1 = y0 - th A1 psi
        Field2D y1(g);
        for (int j = 0; j < nr; ++j) {
            zline.reset();
            for (int i = 0; i < nz; ++i) {
                std::size_t m = g.idx(i, j);
                if (i == 0 || i == nz - 1) {
                    int i0 = (i == 0) ? 0 : nz - 1;
                    int dir = (i == 0) ? 1 : -1;
                    double h2 = g.h_z * g.h_z;
                    zline.add(i, i0, 2.0 / h2);
                    zline.add(i, i0 + dir, -5.0 / h2);
                    zline.add(i, i0 + 2 * dir, 4.0 / h2);
                    zline.add(i, i0 + 3 * dir, -1.0 / h2);
                    zline.rhs()[i] = frozen.dzz[m];
                    continue;
                }
                double czz = c.czz[m] / (g.h_z * g.h_z);
                double cz = c.cz[m] / (2.0 * g.h_z);
                zline.add(i, i, 1.0 + th * 2.0 * czz);
                zline.add(i, i + 1, -th * (czz + cz));
                zline.add(i, i - 1, -th * (czz - cz));
                zline.rhs()[i] = y0(i, j) - th * a1_old(i, j);
            }
            zline.solve();
            for (int i = 0; i < nz; ++i) y1(i, j) = zline.rhs()[i];
        }

        // r sweep: (I - th A2) y2 = y1 - th A2 psi
        Field2D y2(g);
        for (int i = 0; i < nz; ++i) {
            rline.reset();
            for (int j = 0; j < nr; ++j) {
                std::size_t m = g.idx(i, j);
                if (j == 0 || j == nr - 1) {
                    int j0 = (j == 0) ? 0 : nr - 1;
                    int dir = (j == 0) ? 1 : -1;
                    double h2 = g.h_r * g.h_r;
                    rline.add(j, j0, 2.0 / h2);
                    rline.add(j, j0 + dir, -5.0 / h2);
                    rline.add(j, j0 + 2 * dir, 4.0 / h2);
                    rline.add(j, j0 + 3 * dir, -1.0 / h2);
                    rline.rhs()[j] = frozen.drr[m];
                    continue;
                }
                double crr = c.crr[j] / (g.h_r * g.h_r);
                double cr = c.cr[j] / (2.0 * g.h_r);
                rline.add(j, j, 1.0 + th * 2.0 * crr);
                rline.add(j, j + 1, -th * (crr + cr));
                rline.add(j, j - 1, -th * (crr - cr));
                rline.rhs()[j] = y1(i, j) - th * a2_old(i, j);
            }
            rline.solve();
            for (int j = 0; j < nr; ++j) y2(i, j) = rline.rhs()[j];
        }

        psi = std::move(y2);
        if (!psi.all_finite())
            throw std::runtime_error("adi_price: non-finite slice at time index " +
                                     std::to_string(k));
    }

    PriceResult res;
    res.price = psi.interp(z0, r0_rescaled);
    res.time0_values = std::move(psi);
    return res;
}

PriceResult implicit_price(const ModelSurfaces& surfaces, const HullWhiteParams& hw,
                           const TimeGrid& tgrid, const PayoffFn& payoff, double maturity,
                           double z0, double r0_rescaled, double lin_tol) {
    const auto& g = surfaces.beta11.front().grid();
    const std::size_t kmat = tgrid.index_of(maturity);
    Field2D psi = sample_payoff(g, payoff);
    const FrozenBoundary frozen = frozen_boundary_d2(psi);
    ImplicitStepSolver solver(g);
    const std::vector<double> no_source;
    for (std::size_t kk = kmat; kk-- > 0;) {
        StepCoeffs c = make_step_coeffs(hw, surfaces.beta11[kk], surfaces.xi_ref[kk],
                                        tgrid.nodes[kk]);
        psi = solver.step(c, psi, tgrid.dt(kk), frozen, no_source, lin_tol);
    }
    PriceResult res;
    res.price = psi.interp(z0, r0_rescaled);
    res.time0_values = std::move(psi);
    return res;
}

} // namespace otcal
