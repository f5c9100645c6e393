#ifndef OTCAL_GRID_HPP
#define OTCAL_GRID_HPP

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace otcal {

/// Uniform tensor grid on [z_min,z_max] x [r_min,r_max], z = log-price,
/// r = rescaled short rate (rate times R).
struct SpatialGrid2D {
    double z_min, z_max;
    double r_min, r_max;
    std::size_t n_z, n_r;
    double h_z, h_r;

    SpatialGrid2D(double z_min, double z_max, double r_min, double r_max,
                  std::size_t n_z, std::size_t n_r);

    std::size_t size() const { return n_z * n_r; }
    std::size_t idx(std::size_t i, std::size_t j) const { return i * n_r + j; }
    double z(std::size_t i) const { return z_min + static_cast<double>(i) * h_z; }
    double r(std::size_t j) const { return r_min + static_cast<double>(j) * h_r; }

    bool operator==(const SpatialGrid2D&) const = default;
};

/// Strictly increasing time nodes t_0 = 0 < ... < t_N = T with every
/// instrument maturity sitting exactly on a node.
struct TimeGrid {
    std::vector<double> nodes;            // years
    std::vector<std::size_t> maturity_idx; // sorted node indices carrying an expiry

    /// Daily grid out to the largest maturity (in days); every maturity day
    /// becomes a marked node.
    static TimeGrid daily(const std::vector<int>& maturity_days, int steps_per_day = 1);

    std::size_t n_steps() const { return nodes.size() - 1; }
    double horizon() const { return nodes.back(); }
    double dt(std::size_t k) const { return nodes[k + 1] - nodes[k]; }
    bool is_maturity(std::size_t k) const;
    /// Node index of t (within 1e-12), throws if t is off-grid.
    std::size_t index_of(double t) const;
};

/// Scalar field sampled on a SpatialGrid2D, row-major by z then r.
class Field2D {
  public:
    Field2D() = default;
    explicit Field2D(const SpatialGrid2D& grid, double fill = 0.0)
        : grid_(&grid), v_(grid.size(), fill) {}

    const SpatialGrid2D& grid() const { return *grid_; }
    double& operator()(std::size_t i, std::size_t j) { return v_[grid_->idx(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[grid_->idx(i, j)]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    std::size_t size() const { return v_.size(); }

    bool all_finite() const;
    double sup_norm() const;
    /// max_i |a_i - b_i|; fields must share a grid.
    static double sup_diff(const Field2D& a, const Field2D& b);

    /// Bilinear interpolation; (z,r) clamped to the grid hull.
    double interp(double z, double r) const;

    /// CSV with header "z,r,value", full double precision.
    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;

  private:
    const SpatialGrid2D* grid_ = nullptr;
    std::vector<double> v_;
};

/// Spatial derivatives of f by second-order stencils: central in the
/// interior, one-sided at the boundary. f_zr is D_r applied to D_z f.
struct Derivs2D {
    Field2D f_z, f_r, f_zz, f_rr, f_zr;
};
Derivs2D central_diffs(const Field2D& f);

/// Single-axis variants (used by the solvers, which need only a subset).
Field2D diff_z(const Field2D& f);
Field2D diff_zz(const Field2D& f);
Field2D diff_rr(const Field2D& f);

/// Trapezoidal approximation of the double integral of f * density.
double integrate_against(const Field2D& f, const Field2D& density);

} // namespace otcal

#endif
