#ifndef OTCAL_PDE_HPP
#define OTCAL_PDE_HPP

#include <Eigen/Sparse>
#include <vector>

#include "otcal/grid.hpp"
#include "otcal/market.hpp"

namespace otcal {

/// Per-node coefficients of the generator acting in (z, r~) coordinates:
///   L f = cz f_z + cr f_r + czz f_zz + crr f_rr + czr f_zr - react f,
/// where cz = r~/R - beta11/2, cr = R b(t) - a r~, czz = beta11/2,
/// crr = (R sigma_r)^2/2, czr = R xi_ref sigma_r^2, react = r~/R.
struct StepCoeffs {
    const SpatialGrid2D* grid = nullptr;
    std::vector<double> cz, czz, czr; // per node
    std::vector<double> cr, crr, react; // per r-column
};

StepCoeffs make_step_coeffs(const HullWhiteParams& hw, const Field2D& beta11,
                            const Field2D& xi_ref, double t);

/// L f with one-sided second-order stencils at the boundary.
Field2D apply_operator(const StepCoeffs& c, const Field2D& f);

/// Frozen one-sided second derivatives on the perimeter: d2 in z on the
/// z-faces, d2 in r on the r-faces (corners carry both). Off-face entries 0.
struct FrozenBoundary {
    std::vector<double> dzz, drr;
};
FrozenBoundary frozen_boundary_d2(const Field2D& slice);

/// Backward-Euler policy-evaluation / pricing step on the full 2D grid.
/// Solves (I/dt - L) f = f_next/dt - source on the interior; perimeter rows
/// enforce the frozen-second-derivative closure. The sparsity pattern is
/// fixed per grid, so the symbolic factorization is reused across solves.
class ImplicitStepSolver {
  public:
    explicit ImplicitStepSolver(const SpatialGrid2D& grid);

    /// source may be empty (treated as zero). Returns the new slice.
    Field2D step(const StepCoeffs& c, const Field2D& f_next, double dt,
                 const FrozenBoundary& frozen, const std::vector<double>& source,
                 double lin_tol);

    double last_residual() const { return last_residual_; }

  private:
    const SpatialGrid2D* grid_;
    Eigen::SparseMatrix<double> mat_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool analyzed_ = false;
    double last_residual_ = 0.0;
};

/// Solves a general banded system A x = b (LAPACK dgbsv). Bandwidths are in
/// matrix rows/cols; entries set via a dense (i, j) accessor restricted to
/// the band.
class BandedSystem {
  public:
    BandedSystem(int n, int kl, int ku);
    void reset();
    void add(int i, int j, double v);
    std::vector<double>& rhs() { return b_; }
    /// Solves in place; the solution lands in rhs().
    void solve();

  private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<double> b_;
    std::vector<int> ipiv_;
};

} // namespace otcal

#endif
