#pragma once

#include "exitlab/landscape.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace exitlab {

/// Grid graph over the closed domain carrying the degenerate metric
/// g = |grad f| inside and |tangential grad f| on the boundary.
class AgmonGraph {
public:
    struct Edge {
        std::size_t to;
        double weight;
    };

    AgmonGraph(const PotentialField& p, const DomainGrid& grid);

    [[nodiscard]] const DomainGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return adj_.size(); }
    [[nodiscard]] std::span<const Edge> edges(std::size_t node) const { return adj_[node]; }
    [[nodiscard]] double metric(std::size_t node) const { return g_[node]; }

    /// Single-source shortest path distances.
    [[nodiscard]] std::vector<double> distances_from(std::size_t source) const;
    [[nodiscard]] bool connected() const;

private:
    DomainGrid grid_;
    std::vector<double> g_;
    std::vector<std::vector<Edge>> adj_;
};

/// Shortest-path value between the grid nodes nearest to x and y. Always
/// computed from the lower-indexed node so the result is exactly symmetric.
double agmon_distance(const AgmonGraph& graph, const Vec& x, const Vec& y);

/// Minimum distance from x to any node within one spacing of the set.
double agmon_distance_to_set(const AgmonGraph& graph, const Vec& x, std::span<const std::size_t> set_nodes);

/// Boundary nodes within one grid spacing of the complement of the basin of z.
std::vector<std::size_t> basin_complement_nodes(const Landscape& l, const BoundaryMinimum& z);

struct Th1Report {
    bool da1 = false;
    double da1_lhs = 0.0;  // f(z_1) - f(x_0)
    double da1_rhs = 0.0;  // f(z_n) - f(z_1)
    std::vector<bool> da2;
    std::vector<double> da2_lhs;  // d_a(z_i, complement of B_{z_i})
    std::vector<double> da2_rhs;
    std::vector<std::vector<double>> pairwise;  // d_a(z_i, z_j)
    [[nodiscard]] bool all() const;
};

/// Throws HypothesesNotChecked when the landscape has no hypothesis report.
Th1Report check_th1_conditions(const Landscape& l, const AgmonGraph& graph);

/// CSV: header "i,j,distance" followed by one row per ordered pair.
void write_pairwise_csv(std::ostream& os, const Th1Report& report);

}  // namespace exitlab
