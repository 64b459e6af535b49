#include "exitlab/domain.hpp"

#include "exitlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace exitlab {

Domain Domain::interval(double a, double b) {
    if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "interval needs a < b");
    return Domain{1, {a, 0.0}, {b, 0.0}};
}

Domain Domain::rectangle(double ax, double bx, double ay, double by) {
    if (!(ax < bx) || !(ay < by)) throw Error(ErrorCode::InvalidArgument, "rectangle needs lo < hi");
    return Domain{2, {ax, ay}, {bx, by}};
}

bool Domain::contains(const Vec& x) const noexcept {
    for (int k = 0; k < dim; ++k)
        if (!(x(k) > lo[k] && x(k) < hi[k])) return false;
    return true;
}

bool Domain::contains_closed(const Vec& x) const noexcept {
    for (int k = 0; k < dim; ++k)
        if (!(x(k) >= lo[k] && x(k) <= hi[k])) return false;
    return true;
}

double Domain::perimeter() const noexcept {
    if (dim == 1) return 2.0;
    return 2.0 * ((hi[0] - lo[0]) + (hi[1] - lo[1]));
}

double Domain::boundary_coordinate(const Vec& x) const noexcept {
    if (dim == 1) return std::abs(x(0) - lo[0]) <= std::abs(x(0) - hi[0]) ? 0.0 : 1.0;
    const double wx = hi[0] - lo[0];
    const double wy = hi[1] - lo[1];
    const Vec p = project_to_boundary(x);
    const double dxl = std::abs(p(0) - lo[0]);
    const double dxh = std::abs(p(0) - hi[0]);
    const double dyl = std::abs(p(1) - lo[1]);
    const double dyh = std::abs(p(1) - hi[1]);
    const double m = std::min({dxl, dxh, dyl, dyh});
    if (m == dyl) return p(0) - lo[0];
    if (m == dxh) return wx + (p(1) - lo[1]);
    if (m == dyh) return wx + wy + (hi[0] - p(0));
    return 2.0 * wx + wy + (hi[1] - p(1));
}

Vec Domain::boundary_point(double s) const noexcept {
    if (dim == 1) return Vec(s < 0.5 ? lo[0] : hi[0], 0.0);
    const double wx = hi[0] - lo[0];
    const double wy = hi[1] - lo[1];
    const double per = perimeter();
    s = std::fmod(s, per);
    if (s < 0) s += per;
    if (s <= wx) return {lo[0] + s, lo[1]};
    if (s <= wx + wy) return {hi[0], lo[1] + (s - wx)};
    if (s <= 2 * wx + wy) return {hi[0] - (s - wx - wy), hi[1]};
    return {lo[0], hi[1] - (s - 2 * wx - wy)};
}

Vec Domain::boundary_tangent(double s) const noexcept {
    const double wx = hi[0] - lo[0];
    const double wy = hi[1] - lo[1];
    const double per = perimeter();
    s = std::fmod(s, per);
    if (s < 0) s += per;
    if (s < wx) return {1.0, 0.0};
    if (s < wx + wy) return {0.0, 1.0};
    if (s < 2 * wx + wy) return {-1.0, 0.0};
    return {0.0, -1.0};
}

Vec Domain::boundary_normal(double s) const noexcept {
    if (dim == 1) return Vec(s < 0.5 ? -1.0 : 1.0, 0.0);
    const Vec t = boundary_tangent(s);
    return {t(1), -t(0)};
}

Vec Domain::project_to_boundary(const Vec& x) const noexcept {
    Vec p = x;
    for (int k = 0; k < dim; ++k) p(k) = std::clamp(p(k), lo[k], hi[k]);
    if (dim == 1) {
        p(0) = std::abs(p(0) - lo[0]) <= std::abs(p(0) - hi[0]) ? lo[0] : hi[0];
        return p;
    }
    if (contains(p)) {
        const double d[4] = {p(0) - lo[0], hi[0] - p(0), p(1) - lo[1], hi[1] - p(1)};
        const int m = static_cast<int>(std::min_element(d, d + 4) - d);
        if (m == 0) p(0) = lo[0];
        if (m == 1) p(0) = hi[0];
        if (m == 2) p(1) = lo[1];
        if (m == 3) p(1) = hi[1];
    }
    return p;
}

Domain default_domain(const std::string& id) {
    if (id == "P1") return Domain::interval(-1.2, 1.2);
    if (id == "P2") return Domain::interval(0.0, 7.28);
    if (id == "P3" || id == "flat2d" || id == "bowl2d") return Domain::rectangle(-1, 1, -1, 1);
    if (id == "flat1d" || id == "linear") return Domain::interval(-1.0, 1.0);
    if (id == "bowl1d") return Domain::interval(-1.0, 1.0);
    if (id == "asym-well") return Domain::interval(-0.5, 0.6);
    if (id == "double-well-wide") return Domain::interval(-3.0, 3.0);
    throw Error(ErrorCode::InvalidArgument, "no default domain for '" + id + "'");
}

DomainGrid::DomainGrid(Domain domain, int nodes_x, int nodes_y)
    : domain_(domain), n_{nodes_x, domain.dim == 1 ? 1 : nodes_y} {
    if (n_[0] < 3 || (domain_.dim == 2 && n_[1] < 3))
        throw Error(ErrorCode::GridTooCoarse, "need at least 3 nodes per axis");
    for (int a = 0; a < domain_.dim; ++a) dx_[a] = (domain_.hi[a] - domain_.lo[a]) / (n_[a] - 1);
    for (std::size_t k = 0; k < size(); ++k) (is_boundary(k) ? boundary_ : interior_).push_back(k);
}

DomainGrid DomainGrid::uniform(const Domain& domain, int nodes_per_axis) {
    return DomainGrid(domain, nodes_per_axis, nodes_per_axis);
}

double DomainGrid::cell_volume() const noexcept { return domain_.dim == 1 ? dx_[0] : dx_[0] * dx_[1]; }

Vec DomainGrid::point(std::size_t k) const noexcept {
    const int i = ix(k);
    const int j = iy(k);
    Vec p(domain_.lo[0] + i * dx_[0], 0.0);
    if (domain_.dim == 2) p(1) = domain_.lo[1] + j * dx_[1];
    // pin the last node exactly onto the boundary
    if (i == n_[0] - 1) p(0) = domain_.hi[0];
    if (domain_.dim == 2 && j == n_[1] - 1) p(1) = domain_.hi[1];
    return p;
}

unsigned DomainGrid::faces(std::size_t k) const noexcept {
    const int i = ix(k);
    const int j = iy(k);
    unsigned m = 0;
    if (i == 0) m |= FaceXLo;
    if (i == n_[0] - 1) m |= FaceXHi;
    if (domain_.dim == 2) {
        if (j == 0) m |= FaceYLo;
        if (j == n_[1] - 1) m |= FaceYHi;
    }
    return m;
}

bool DomainGrid::is_corner(std::size_t k) const noexcept {
    if (domain_.dim == 1) return false;
    const unsigned m = faces(k);
    return (m & (FaceXLo | FaceXHi)) && (m & (FaceYLo | FaceYHi));
}

Vec DomainGrid::face_normal(Face face) noexcept {
    switch (face) {
        case FaceXLo: return {-1.0, 0.0};
        case FaceXHi: return {1.0, 0.0};
        case FaceYLo: return {0.0, -1.0};
        case FaceYHi: return {0.0, 1.0};
    }
    return Vec::Zero();
}

std::vector<std::size_t> DomainGrid::axis_neighbors(std::size_t k) const {
    std::vector<std::size_t> out;
    const int i = ix(k);
    const int j = iy(k);
    if (i > 0) out.push_back(index(i - 1, j));
    if (i + 1 < n_[0]) out.push_back(index(i + 1, j));
    if (domain_.dim == 2) {
        if (j > 0) out.push_back(index(i, j - 1));
        if (j + 1 < n_[1]) out.push_back(index(i, j + 1));
    }
    return out;
}

std::size_t DomainGrid::nearest_node(const Vec& x) const noexcept {
    int idx[2] = {0, 0};
    for (int a = 0; a < domain_.dim; ++a) {
        const double t = std::round((x(a) - domain_.lo[a]) / dx_[a]);
        idx[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(n_[a] - 1)));
    }
    return index(idx[0], idx[1]);
}

}  // namespace exitlab
