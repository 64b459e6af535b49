#include "exitlab/agmon.hpp"

#include "exitlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

namespace exitlab {

namespace {

double tangential_norm(const DomainGrid& g, std::size_t k, const Vec& grad) {
    const unsigned m = g.faces(k);
    if (g.dim() == 1) return 0.0;
    const bool on_x_face = m & (FaceXLo | FaceXHi);
    const bool on_y_face = m & (FaceYLo | FaceYHi);
    if (on_x_face && on_y_face) return std::min(std::abs(grad(0)), std::abs(grad(1)));
    return on_x_face ? std::abs(grad(1)) : std::abs(grad(0));
}

}  // namespace

AgmonGraph::AgmonGraph(const PotentialField& p, const DomainGrid& grid)
    : grid_(grid), g_(grid.size()), adj_(grid.size()) {
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        const Vec gr = p.grad(grid_.point(k));
        g_[k] = grid_.is_boundary(k) ? tangential_norm(grid_, k, gr) : gr.head(grid_.dim()).norm();
    }
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    auto link = [&](std::size_t a, std::size_t b) {
        const double len = (grid_.point(a) - grid_.point(b)).norm();
        const double w = 0.5 * (g_[a] + g_[b]) * len;
        adj_[a].push_back({b, w});
        adj_[b].push_back({a, w});
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = grid_.index(i, j);
            if (i + 1 < nx) link(k, grid_.index(i + 1, j));
            if (grid_.dim() == 2 && j + 1 < ny) {
                link(k, grid_.index(i, j + 1));
                if (i + 1 < nx) link(k, grid_.index(i + 1, j + 1));
                if (i > 0) link(k, grid_.index(i - 1, j + 1));
            }
        }
    }
}

std::vector<double> AgmonGraph::distances_from(std::size_t source) const {
    std::vector<double> dist(adj_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const Edge& e : adj_[u]) {
            const double nd = d + e.weight;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                pq.push({nd, e.to});
            }
        }
    }
    return dist;
}

bool AgmonGraph::connected() const {
    if (adj_.empty()) return true;
    const auto d = distances_from(0);
    return std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); });
}

double agmon_distance(const AgmonGraph& graph, const Vec& x, const Vec& y) {
    std::size_t a = graph.grid().nearest_node(x);
    std::size_t b = graph.grid().nearest_node(y);
    if (a == b) return 0.0;
    if (b < a) std::swap(a, b);
    const double d = graph.distances_from(a)[b];
    if (!std::isfinite(d)) throw Error(ErrorCode::DisconnectedGraph, "nodes are not connected");
    return d;
}

double agmon_distance_to_set(const AgmonGraph& graph, const Vec& x, std::span<const std::size_t> set_nodes) {
    if (set_nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty target set");
    const auto dist = graph.distances_from(graph.grid().nearest_node(x));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k : set_nodes) best = std::min(best, dist[k]);
    if (!std::isfinite(best)) throw Error(ErrorCode::DisconnectedGraph, "target set unreachable");
    return best;
}

std::vector<std::size_t> basin_complement_nodes(const Landscape& l, const BoundaryMinimum& z) {
    const DomainGrid& g = l.grid;
    const Domain& d = g.domain();
    std::vector<std::size_t> out;
    if (d.dim == 1) {
        for (std::size_t k : g.boundary_nodes())
            if (d.boundary_coordinate(g.point(k)) != z.coordinate) out.push_back(k);
        return out;
    }
    const double h = std::max(g.spacing(0), g.spacing(1));
    const double per = d.perimeter();
    const double len = z.basin.length();
    for (std::size_t k : g.boundary_nodes()) {
        const double s = d.boundary_coordinate(g.point(k));
        const double off = std::fmod(s - z.basin.begin + 2 * per, per);
        // distance from s to the closed complement, measured along the loop
        const double inside = (off > 0.0 && off < len) ? std::min(off, len - off) : 0.0;
        if (inside <= h * (1.0 + 1e-9)) out.push_back(k);
    }
    return out;
}

bool Th1Report::all() const {
    return da1 && std::all_of(da2.begin(), da2.end(), [](bool b) { return b; });
}

Th1Report check_th1_conditions(const Landscape& l, const AgmonGraph& graph) {
    if (!l.report) throw Error(ErrorCode::HypothesesNotChecked, "landscape carries no hypothesis report");
    if (l.zs.empty()) throw Error(ErrorCode::InvalidArgument, "no boundary minima");
    Th1Report r;
    const double fz1 = l.zs.front().f_value;
    const double fzn = l.zs.back().f_value;
    r.da1_lhs = fz1 - l.x0().f_value;
    r.da1_rhs = fzn - fz1;
    r.da1 = r.da1_lhs > r.da1_rhs;
    const std::size_t n = l.zs.size();
    r.pairwise.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            r.pairwise[i][j] = r.pairwise[j][i] = agmon_distance(graph, l.zs[i].location, l.zs[j].location);
    for (const auto& z : l.zs) {
        const auto comp = basin_complement_nodes(l, z);
        const double lhs = agmon_distance_to_set(graph, z.location, comp);
        const double rhs = std::max(fzn - z.f_value, z.f_value - fz1);
        r.da2_lhs.push_back(lhs);
        r.da2_rhs.push_back(rhs);
        r.da2.push_back(lhs > rhs);
    }
    return r;
}

void write_pairwise_csv(std::ostream& os, const Th1Report& report) {
    os << "i,j,distance\n";
    os.precision(17);
    for (std::size_t i = 0; i < report.pairwise.size(); ++i)
        for (std::size_t j = 0; j < report.pairwise.size(); ++j)
            os << i + 1 << ',' << j + 1 << ',' << report.pairwise[i][j] << '\n';
}

}  // namespace exitlab
