#include "otcal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace otcal {

SpatialGrid2D::SpatialGrid2D(double z_min_, double z_max_, double r_min_, double r_max_,
                             std::size_t n_z_, std::size_t n_r_)
    : z_min(z_min_), z_max(z_max_), r_min(r_min_), r_max(r_max_), n_z(n_z_), n_r(n_r_) {
    if (n_z < 3 || n_r < 3)
        throw std::invalid_argument("SpatialGrid2D: need at least 3 nodes per axis");
    if (!(z_max > z_min) || !(r_max > r_min))
        throw std::invalid_argument("SpatialGrid2D: empty domain");
    h_z = (z_max - z_min) / static_cast<double>(n_z - 1);
    h_r = (r_max - r_min) / static_cast<double>(n_r - 1);
}

TimeGrid TimeGrid::daily(const std::vector<int>& maturity_days, int steps_per_day) {
    if (maturity_days.empty())
        throw std::invalid_argument("TimeGrid: no maturities");
    if (steps_per_day < 1)
        throw std::invalid_argument("TimeGrid: steps_per_day < 1");
    int horizon = *std::max_element(maturity_days.begin(), maturity_days.end());
    if (horizon <= 0)
        throw std::invalid_argument("TimeGrid: non-positive horizon");
    std::vector<int> days(maturity_days);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
    if (days.front() <= 0) throw std::invalid_argument("TimeGrid: non-positive maturity");

    // Maturity dates are quoted on a 360-day year (Table 2's price<->IV
    // pairs invert exactly at T = days/360); the grid itself steps at the
    // resolution of one calendar day, with the maturity instants inserted
    // as extra nodes.
    TimeGrid tg;
    const double base = 1.0 / (365.0 * steps_per_day);
    const double T_max = static_cast<double>(horizon) / 360.0;
    for (int k = 0; static_cast<double>(k) * base <= T_max + 1e-12; ++k)
        tg.nodes.push_back(static_cast<double>(k) * base);
    for (int d : days) tg.nodes.push_back(static_cast<double>(d) / 360.0);
    std::sort(tg.nodes.begin(), tg.nodes.end());
    tg.nodes.erase(std::unique(tg.nodes.begin(), tg.nodes.end(),
                               [](double x, double y) { return y - x < 1e-12; }),
                   tg.nodes.end());
    for (int d : days) tg.maturity_idx.push_back(tg.index_of(static_cast<double>(d) / 360.0));
    return tg;
}

bool TimeGrid::is_maturity(std::size_t k) const {
    return std::binary_search(maturity_idx.begin(), maturity_idx.end(), k);
}

std::size_t TimeGrid::index_of(double t) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t - 1e-12);
    if (it == nodes.end() || std::abs(*it - t) > 1e-12)
        throw std::invalid_argument("TimeGrid: time off-grid");
    return static_cast<std::size_t>(it - nodes.begin());
}

bool Field2D::all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

double Field2D::sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double Field2D::sup_diff(const Field2D& a, const Field2D& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("Field2D::sup_diff: grid mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.v_.size(); ++k)
        m = std::max(m, std::abs(a.v_[k] - b.v_[k]));
    return m;
}

double Field2D::interp(double z, double r) const {
    const auto& g = *grid_;
    double x = std::clamp((z - g.z_min) / g.h_z, 0.0, static_cast<double>(g.n_z - 1));
    double y = std::clamp((r - g.r_min) / g.h_r, 0.0, static_cast<double>(g.n_r - 1));
    std::size_t i = std::min(static_cast<std::size_t>(x), g.n_z - 2);
    std::size_t j = std::min(static_cast<std::size_t>(y), g.n_r - 2);
    double ax = x - static_cast<double>(i), ay = y - static_cast<double>(j);
    return (1 - ax) * (1 - ay) * (*this)(i, j) + ax * (1 - ay) * (*this)(i + 1, j) +
           (1 - ax) * ay * (*this)(i, j + 1) + ax * ay * (*this)(i + 1, j + 1);
}

void Field2D::write_csv(std::ostream& os) const {
    os << "z,r,value\n";
    os.precision(17);
    for (std::size_t i = 0; i < grid_->n_z; ++i)
        for (std::size_t j = 0; j < grid_->n_r; ++j)
            os << grid_->z(i) << ',' << grid_->r(j) << ',' << (*this)(i, j) << '\n';
}

void Field2D::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("Field2D: cannot open " + path);
    write_csv(os);
}

namespace {

void check_input(const Field2D& f) {
    if (!f.all_finite())
        throw std::invalid_argument("central_diffs: non-finite input");
}

// One-sided stencils are second order: f' = (-3f0+4f1-f2)/2h,
// f'' = (2f0-5f1+4f2-f3)/h^2 (mirrored at the upper end).
template <class Get>
double d1(const Get& g, std::size_t k, std::size_t n, double h) {
    if (k == 0) return (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h);
    if (k == n - 1) return (3.0 * g(n - 1) - 4.0 * g(n - 2) + g(n - 3)) / (2.0 * h);
    return (g(k + 1) - g(k - 1)) / (2.0 * h);
}

template <class Get>
double d2(const Get& g, std::size_t k, std::size_t n, double h) {
    if (k == 0) return (2.0 * g(0) - 5.0 * g(1) + 4.0 * g(2) - g(3)) / (h * h);
    if (k == n - 1)
        return (2.0 * g(n - 1) - 5.0 * g(n - 2) + 4.0 * g(n - 3) - g(n - 4)) / (h * h);
    return (g(k + 1) - 2.0 * g(k) + g(k - 1)) / (h * h);
}

} // namespace

Field2D diff_z(const Field2D& f) {
    check_input(f);
    const auto& g = f.grid();
    Field2D out(g);
    for (std::size_t j = 0; j < g.n_r; ++j)
        for (std::size_t i = 0; i < g.n_z; ++i)
            out(i, j) = d1([&](std::size_t k) { return f(k, j); }, i, g.n_z, g.h_z);
    return out;
}

Field2D diff_zz(const Field2D& f) {
    check_input(f);
    const auto& g = f.grid();
    if (g.n_z < 4)
        throw std::invalid_argument("diff_zz: need 4 nodes for one-sided boundary stencil");
    Field2D out(g);
    for (std::size_t j = 0; j < g.n_r; ++j)
        for (std::size_t i = 0; i < g.n_z; ++i)
            out(i, j) = d2([&](std::size_t k) { return f(k, j); }, i, g.n_z, g.h_z);
    return out;
}

Field2D diff_rr(const Field2D& f) {
    check_input(f);
    const auto& g = f.grid();
    if (g.n_r < 4)
        throw std::invalid_argument("diff_rr: need 4 nodes for one-sided boundary stencil");
    Field2D out(g);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j)
            out(i, j) = d2([&](std::size_t k) { return f(i, k); }, j, g.n_r, g.h_r);
    return out;
}

Derivs2D central_diffs(const Field2D& f) {
    check_input(f);
    const auto& g = f.grid();
    Derivs2D d{Field2D(g), Field2D(g), Field2D(g), Field2D(g), Field2D(g)};
    d.f_z = diff_z(f);
    d.f_zz = diff_zz(f);
    d.f_rr = diff_rr(f);
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j)
            d.f_r(i, j) = d1([&](std::size_t k) { return f(i, k); }, j, g.n_r, g.h_r);
    // mixed derivative as D_r composed with D_z
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j)
            d.f_zr(i, j) = d1([&](std::size_t k) { return d.f_z(i, k); }, j, g.n_r, g.h_r);
    return d;
}

double integrate_against(const Field2D& f, const Field2D& density) {
    if (!(f.grid() == density.grid()))
        throw std::invalid_argument("integrate_against: grid mismatch");
    const auto& g = f.grid();
    auto w = [](std::size_t k, std::size_t n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
    double s = 0.0;
    for (std::size_t i = 0; i < g.n_z; ++i)
        for (std::size_t j = 0; j < g.n_r; ++j)
            s += w(i, g.n_z) * w(j, g.n_r) * f(i, j) * density(i, j);
    return s * g.h_z * g.h_r;
}

} // namespace otcal
