#pragma once

#include "exitlab/potential.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace exitlab {

/// Interval (a,b) for d=1, rectangle (ax,bx) x (ay,by) for d=2.
struct Domain {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 0.0};

    static Domain interval(double a, double b);
    static Domain rectangle(double ax, double bx, double ay, double by);

    [[nodiscard]] bool contains(const Vec& x) const noexcept;          // open set
    [[nodiscard]] bool contains_closed(const Vec& x) const noexcept;
    [[nodiscard]] double perimeter() const noexcept;
    /// Arc-length coordinate of a boundary point along the loop that starts
    /// at (ax,ay) and runs counter-clockwise. d=1: 0 for a, 1 for b.
    [[nodiscard]] double boundary_coordinate(const Vec& x) const noexcept;
    [[nodiscard]] Vec boundary_point(double s) const noexcept;
    /// Unit tangent along the loop direction at coordinate s (edge interior).
    [[nodiscard]] Vec boundary_tangent(double s) const noexcept;
    /// Outward unit normal at coordinate s (edge interior).
    [[nodiscard]] Vec boundary_normal(double s) const noexcept;
    [[nodiscard]] Vec project_to_boundary(const Vec& x) const noexcept;
};

/// Default domain of a catalog potential.
Domain default_domain(const std::string& catalog_id);

enum Face : unsigned { FaceXLo = 1u, FaceXHi = 2u, FaceYLo = 4u, FaceYHi = 8u };

/// Regular node grid covering the closed domain, boundary nodes included.
/// Node (i,j) has flat index i + nx*j.
class DomainGrid {
public:
    DomainGrid(Domain domain, int nodes_x, int nodes_y = 1);
    /// Same node count on every axis.
    static DomainGrid uniform(const Domain& domain, int nodes_per_axis);

    [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
    [[nodiscard]] int dim() const noexcept { return domain_.dim; }
    [[nodiscard]] int nx() const noexcept { return n_[0]; }
    [[nodiscard]] int ny() const noexcept { return n_[1]; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(n_[0]) * n_[1]; }
    [[nodiscard]] double spacing(int axis) const noexcept { return dx_[axis]; }
    /// Product of spacings over the active axes.
    [[nodiscard]] double cell_volume() const noexcept;

    [[nodiscard]] std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * j;
    }
    [[nodiscard]] int ix(std::size_t k) const noexcept { return static_cast<int>(k % n_[0]); }
    [[nodiscard]] int iy(std::size_t k) const noexcept { return static_cast<int>(k / n_[0]); }
    [[nodiscard]] Vec point(std::size_t k) const noexcept;

    /// Bitmask of Face values; zero for interior nodes.
    [[nodiscard]] unsigned faces(std::size_t k) const noexcept;
    [[nodiscard]] bool is_boundary(std::size_t k) const noexcept { return faces(k) != 0; }
    [[nodiscard]] bool is_corner(std::size_t k) const noexcept;
    [[nodiscard]] const std::vector<std::size_t>& interior_nodes() const noexcept { return interior_; }
    [[nodiscard]] const std::vector<std::size_t>& boundary_nodes() const noexcept { return boundary_; }
    /// Outward unit normal of one face.
    [[nodiscard]] static Vec face_normal(Face face) noexcept;
    /// Axis neighbours inside the closed grid.
    [[nodiscard]] std::vector<std::size_t> axis_neighbors(std::size_t k) const;
    [[nodiscard]] std::size_t nearest_node(const Vec& x) const noexcept;

private:
    Domain domain_;
    std::array<int, 2> n_;
    std::array<double, 2> dx_{1.0, 1.0};
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> boundary_;
};

}  // namespace exitlab
