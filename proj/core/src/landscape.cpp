#include "exitlab/landscape.hpp"

#include "exitlab/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace exitlab {

namespace {

constexpr double kBoundaryGradTol = 1e-12;

bool ties(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(a)); }

// Boundary nodes in loop order with their arc-length coordinates (d=2).
struct LoopSample {
    std::vector<double> s;
    std::vector<double> f;
};

LoopSample sample_loop(const PotentialField& p, const DomainGrid& g) {
    const Domain& d = g.domain();
    LoopSample out;
    std::vector<std::size_t> order;
    const int nx = g.nx();
    const int ny = g.ny();
    for (int i = 0; i < nx; ++i) order.push_back(g.index(i, 0));
    for (int j = 1; j < ny; ++j) order.push_back(g.index(nx - 1, j));
    for (int i = nx - 2; i >= 0; --i) order.push_back(g.index(i, ny - 1));
    for (int j = ny - 2; j >= 1; --j) order.push_back(g.index(0, j));
    for (std::size_t k : order) {
        const Vec x = g.point(k);
        out.s.push_back(d.boundary_coordinate(x));
        out.f.push_back(p(x));
    }
    // the first corner is coordinate 0; keep the sequence increasing
    return out;
}

std::vector<double> corner_coordinates(const Domain& d) {
    const double wx = d.hi[0] - d.lo[0];
    const double wy = d.hi[1] - d.lo[1];
    return {0.0, wx, wx + wy, 2 * wx + wy};
}

double wrap(double s, double per) {
    s = std::fmod(s, per);
    return s < 0 ? s + per : s;
}

// Minimises sign*f along the loop on [s_lo, s_hi] (s_hi may exceed the
// perimeter), splitting at corners. Returns the coordinate.
double refine_on_loop(const PotentialField& p, const Domain& d, double s_lo, double s_hi, double sign) {
    const double per = d.perimeter();
    std::vector<double> cuts{s_lo};
    for (double base : {0.0, per}) {
        for (double c : corner_coordinates(d)) {
            const double cc = c + base;
            if (cc > s_lo && cc < s_hi) cuts.push_back(cc);
        }
    }
    cuts.push_back(s_hi);
    std::sort(cuts.begin(), cuts.end());
    auto g = [&](double s) { return sign * p(d.boundary_point(wrap(s, per))); };
    double best_s = s_lo;
    double best_v = g(s_lo);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        // stay strictly inside the edge so tangents are well defined
        const double eps = 1e-13 * per;
        auto r = boost::math::tools::brent_find_minima(g, a + eps, b - eps, 52);
        if (r.second < best_v) {
            best_v = r.second;
            best_s = r.first;
        }
        for (double e : {a, b}) {
            const double v = g(e);
            if (v <= best_v) {
                best_v = v;
                best_s = e;
            }
        }
    }
    return wrap(best_s, per);
}

bool is_corner_coordinate(const Domain& d, double s) {
    for (double c : corner_coordinates(d))
        if (std::abs(s - c) < 1e-12 * d.perimeter() || std::abs(s - c - d.perimeter()) < 1e-12 * d.perimeter())
            return true;
    return false;
}

double tangential_second_derivative(const PotentialField& p, const Domain& d, double s) {
    const Vec t = d.boundary_tangent(s);
    return t.dot(p.hess(d.boundary_point(s)) * t);
}

// Walks the sampled loop from index k0 in direction dir while f increases.
// Returns the refined coordinate of the first local maximum reached
// (unwrapped relative to s0).
double walk_to_max(const PotentialField& p, const Domain& d, const LoopSample& ls, std::size_t k0, int dir) {
    const std::size_t m = ls.s.size();
    const double per = d.perimeter();
    std::size_t k = k0;
    for (std::size_t steps = 0; steps < m; ++steps) {
        const std::size_t nxt = (k + m + dir) % m;
        if (ls.f[nxt] == ls.f[k] && steps > 0)
            throw Error(ErrorCode::DegenerateBoundaryCritical, "flat stretch of f along the boundary");
        if (ls.f[nxt] < ls.f[k]) {
            const std::size_t prv = (k + m - dir) % m;
            double a = ls.s[dir > 0 ? prv : nxt];
            double b = ls.s[dir > 0 ? nxt : prv];
            if (b <= a) b += per;
            return refine_on_loop(p, d, a, b, -1.0);
        }
        k = nxt;
    }
    throw Error(ErrorCode::DegenerateBoundaryCritical, "no local maximum of f along the boundary");
}

std::size_t nearest_sample(const LoopSample& ls, double s, double per) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ls.s.size(); ++k) {
        double dd = std::abs(ls.s[k] - s);
        dd = std::min(dd, per - dd);
        if (dd < bd) {
            bd = dd;
            best = k;
        }
    }
    return best;
}

std::vector<BoundaryMinimum> endpoint_minima(const PotentialField& p, const Domain& d) {
    std::vector<BoundaryMinimum> zs;
    for (int side = 0; side < 2; ++side) {
        BoundaryMinimum z;
        z.location = Vec(side == 0 ? d.lo[0] : d.hi[0], 0.0);
        z.f_value = p(z.location);
        z.normal_derivative = (side == 0 ? -1.0 : 1.0) * p.grad(z.location)(0);
        z.tangential_hess_det = 1.0;
        z.coordinate = side;
        z.basin = BoundaryArc{z.coordinate, z.coordinate, d.perimeter(), true};
        zs.push_back(z);
    }
    return zs;
}

}  // namespace

double CriticalPoint::det_hess() const noexcept {
    double d = 1.0;
    for (double e : hess_eigenvalues) d *= e;
    return d;
}

bool BoundaryArc::contains(double s) const noexcept {
    if (point) return std::abs(s - begin) < 1e-12;
    if (perimeter <= 0) return false;
    const double len = length();
    const double off = std::fmod(s - begin + 2 * perimeter, perimeter);
    return off > 0.0 && off < len;
}

double BoundaryArc::length() const noexcept {
    if (point) return 0.0;
    double l = std::fmod(end - begin + 2 * perimeter, perimeter);
    if (l == 0.0 && end != begin) l = perimeter;
    return l;
}

Evaluation eval_all(const PotentialField& p, const Vec& x) { return p.eval_all(x); }

std::vector<CriticalPoint> find_critical_points(const PotentialField& p, const DomainGrid& g,
                                                const CriticalPointOptions& opt) {
    const int dim = p.dimension();
    const Domain& dom = g.domain();
    std::vector<double> gn(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) gn[k] = p.grad(g.point(k)).head(dim).norm();
    std::vector<double> sorted = gn;
    const std::size_t q = static_cast<std::size_t>(opt.seed_percentile * (sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + q, sorted.end());
    const double threshold = sorted[q];

    std::vector<CriticalPoint> out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (gn[k] > threshold) continue;
        Vec x = g.point(k);
        bool ok = false;
        for (int it = 0; it < opt.max_newton_iterations; ++it) {
            const Vec gr = p.grad(x);
            if (gr.head(dim).norm() < opt.newton_tol) {
                ok = true;
                break;
            }
            const Mat h = p.hess(x);
            Vec step = Vec::Zero();
            if (dim == 1) {
                if (h(0, 0) == 0.0) break;
                step(0) = gr(0) / h(0, 0);
            } else {
                Eigen::FullPivLU<Mat> lu(h);
                if (!lu.isInvertible()) break;
                step = lu.solve(gr);
            }
            x -= step;
            if (!std::isfinite(x(0)) || !std::isfinite(x(1))) break;
            if (!dom.contains_closed(x)) break;
        }
        if (!ok || !dom.contains(x)) continue;
        bool dup = false;
        for (const auto& c : out)
            if ((c.location - x).norm() < opt.dedupe_radius) dup = true;
        if (dup) continue;
        CriticalPoint cp;
        cp.location = x;
        cp.f_value = p(x);
        cp.hessian = p.hess(x);
        if (dim == 1) {
            cp.hess_eigenvalues = {cp.hessian(0, 0)};
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(cp.hessian);
            cp.hess_eigenvalues = {es.eigenvalues()(0), es.eigenvalues()(1)};
        }
        for (double e : cp.hess_eigenvalues) {
            if (std::abs(e) < opt.morse_tol) throw Error(ErrorCode::NonMorse, "degenerate critical point");
            if (e < 0) ++cp.index;
        }
        out.push_back(std::move(cp));
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.location(0) != b.location(0)) return a.location(0) < b.location(0);
        return a.location(1) < b.location(1);
    });
    return out;
}

std::vector<BoundaryMinimum> boundary_minima(const PotentialField& p, const DomainGrid& g) {
    const Domain& d = g.domain();
    std::vector<BoundaryMinimum> zs;
    for (std::size_t k : g.boundary_nodes()) {
        if (p.grad(g.point(k)).head(d.dim).norm() < kBoundaryGradTol)
            throw Error(ErrorCode::GradientVanishesOnBoundary, "grad f vanishes at a boundary node");
    }
    if (d.dim == 1) {
        zs = endpoint_minima(p, d);
    } else {
        const LoopSample ls = sample_loop(p, g);
        const std::size_t m = ls.s.size();
        const double per = d.perimeter();
        std::vector<double> found;
        for (std::size_t k = 0; k < m; ++k) {
            const double fp = ls.f[(k + m - 1) % m];
            const double fn = ls.f[(k + 1) % m];
            if (!(ls.f[k] < fp && ls.f[k] <= fn)) continue;
            double a = ls.s[(k + m - 1) % m];
            double b = ls.s[(k + 1) % m];
            if (b <= a) b += per;
            const double s = refine_on_loop(p, d, a, b, 1.0);
            bool dup = false;
            for (double o : found) {
                const double dd = std::abs(o - s);
                if (std::min(dd, per - dd) < 1e-9 * per) dup = true;
            }
            if (!dup) found.push_back(s);
        }
        for (double s : found) {
            BoundaryMinimum z;
            z.coordinate = s;
            z.location = d.boundary_point(s);
            z.f_value = p(z.location);
            z.at_corner = is_corner_coordinate(d, s);
            if (z.at_corner) {
                // no tangent at a corner: average the two face normals
                const Vec n = (d.boundary_normal(s + 1e-9) + d.boundary_normal(s - 1e-9)).normalized();
                z.normal_derivative = p.grad(z.location).dot(n);
                z.tangential_hess_det = std::numeric_limits<double>::quiet_NaN();
            } else {
                z.normal_derivative = p.grad(z.location).dot(d.boundary_normal(s));
                z.tangential_hess_det = tangential_second_derivative(p, d, s);
            }
            zs.push_back(z);
        }
    }
    std::stable_sort(zs.begin(), zs.end(),
                     [](const BoundaryMinimum& a, const BoundaryMinimum& b) { return a.f_value < b.f_value; });
    for (std::size_t i = 0; i < zs.size(); ++i) {
        zs[i].rank = static_cast<int>(i + 1);
        if (d.dim == 2) zs[i].basin = boundary_basin(zs[i], p, g);
    }
    return zs;
}

int count_global(const std::vector<BoundaryMinimum>& zs, double rel_tol) {
    if (zs.empty()) return 0;
    int n = 0;
    for (const auto& z : zs)
        if (ties(z.f_value, zs.front().f_value, rel_tol)) ++n;
    return n;
}

BoundaryArc boundary_basin(const BoundaryMinimum& z, const PotentialField& p, const DomainGrid& g) {
    const Domain& d = g.domain();
    if (d.dim == 1) return BoundaryArc{z.coordinate, z.coordinate, d.perimeter(), true};
    if (!z.at_corner && std::abs(z.tangential_hess_det) < 1e-8)
        throw Error(ErrorCode::DegenerateBoundaryCritical, "degenerate boundary minimum");
    const LoopSample ls = sample_loop(p, g);
    const double per = d.perimeter();
    const std::size_t k0 = nearest_sample(ls, z.coordinate, per);
    const double fwd = walk_to_max(p, d, ls, k0, +1);
    const double bwd = walk_to_max(p, d, ls, k0, -1);
    return BoundaryArc{wrap(bwd, per), wrap(fwd, per), per, false};
}

std::vector<SublevelComponent> sublevel_components(const PotentialField& p, const DomainGrid& g, double level,
                                                   const std::vector<CriticalPoint>& minima) {
    const std::size_t n = g.size();
    std::vector<char> in(n, 0);
    bool any = false;
    for (std::size_t k : g.interior_nodes()) {
        if (p(g.point(k)) < level) {
            in[k] = 1;
            any = true;
        }
    }
    if (!any) throw Error(ErrorCode::EmptySublevel, "no grid node below the level");
    std::vector<int> label(n, -1);
    std::vector<SublevelComponent> out;
    for (std::size_t seed : g.interior_nodes()) {
        if (!in[seed] || label[seed] >= 0) continue;
        SublevelComponent c;
        c.id = static_cast<int>(out.size());
        std::deque<std::size_t> queue{seed};
        label[seed] = c.id;
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            c.nodes.push_back(k);
            for (std::size_t nb : g.axis_neighbors(k)) {
                if (g.is_boundary(nb)) {
                    c.touches_boundary = true;
                    continue;
                }
                if (in[nb] && label[nb] < 0) {
                    label[nb] = c.id;
                    queue.push_back(nb);
                }
            }
        }
        out.push_back(std::move(c));
    }
    for (const auto& m : minima) {
        if (!m.is_minimum()) continue;
        const int id = label[g.nearest_node(m.location)];
        if (id >= 0) out[static_cast<std::size_t>(id)].minima.push_back(m.location);
    }
    return out;
}

HypothesisReport check_hypotheses(const PotentialField& p, const DomainGrid& g) {
    HypothesisReport r;
    const Domain& d = g.domain();
    bool f_morse = true;
    bool fb_morse = true;
    bool grad_ok = true;
    std::vector<CriticalPoint> cps;
    std::vector<BoundaryMinimum> zs;
    try {
        cps = find_critical_points(p, g);
    } catch (const Error& e) {
        f_morse = false;
        r.failure_reasons.emplace_back(std::string("f not Morse: ") + e.what());
    }
    try {
        zs = boundary_minima(p, g);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::GradientVanishesOnBoundary) grad_ok = false;
        else fb_morse = false;
        r.failure_reasons.emplace_back(std::string("boundary analysis failed: ") + e.what());
    }
    for (const auto& z : zs) {
        if (d.dim == 2 && !z.at_corner && std::abs(z.tangential_hess_det) < 1e-8) {
            fb_morse = false;
            r.failure_reasons.emplace_back("f restricted to the boundary is not Morse");
        }
    }
    r.h1 = f_morse && fb_morse && grad_ok;
    r.h_morse = r.h1;
    if (!r.h1 && grad_ok && f_morse && fb_morse) r.failure_reasons.emplace_back("[H1] failed");
    r.n = static_cast<int>(zs.size());
    r.n0 = count_global(zs);

    // [H2]
    double grid_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) grid_min = std::min(grid_min, p(g.point(k)));
    if (cps.size() == 1 && cps.front().is_minimum() && !zs.empty() && zs.front().f_value > cps.front().f_value &&
        grid_min >= cps.front().f_value - 1e-12 * std::max(1.0, std::abs(grid_min))) {
        r.h2 = true;
    } else {
        r.failure_reasons.emplace_back("[H2] needs a single interior critical point that is the global minimum, below the boundary minimum");
    }

    // [H3]
    r.h3 = grad_ok;
    for (std::size_t k : g.boundary_nodes()) {
        const unsigned m = g.faces(k);
        const Vec gr = p.grad(g.point(k));
        for (Face f : {FaceXLo, FaceXHi, FaceYLo, FaceYHi}) {
            if ((m & f) && !(gr.dot(DomainGrid::face_normal(f)) > 0.0)) r.h3 = false;
        }
    }
    if (!r.h3) r.failure_reasons.emplace_back("[H3] normal derivative not positive on the whole boundary");

    // [H-Min]
    r.h_min = false;
    if (!zs.empty() && f_morse) {
        const double level = zs.front().f_value;
        try {
            const auto comps = sublevel_components(p, g, level, cps);
            bool all_touch = true;
            for (const auto& c : comps) all_touch = all_touch && c.touches_boundary;
            bool minima_inside = true;
            for (const auto& c : cps) {
                if (!c.is_minimum()) continue;
                const std::size_t k = g.nearest_node(c.location);
                bool found = false;
                for (const auto& comp : comps)
                    found = found || std::find(comp.nodes.begin(), comp.nodes.end(), k) != comp.nodes.end();
                minima_inside = minima_inside && c.f_value < level && found;
            }
            // components holding the global minima
            double fmin = std::numeric_limits<double>::infinity();
            for (const auto& c : cps)
                if (c.is_minimum()) fmin = std::min(fmin, c.f_value);
            std::vector<int> owners;
            for (const auto& comp : comps) {
                for (const auto& m : comp.minima) {
                    if (ties(p(m), fmin, 1e-9) && std::find(owners.begin(), owners.end(), comp.id) == owners.end())
                        owners.push_back(comp.id);
                }
            }
            if (!all_touch) r.failure_reasons.emplace_back("[H-Min] a sublevel component does not reach the boundary");
            if (!minima_inside) r.failure_reasons.emplace_back("[H-Min] a local minimum lies outside the sublevel set");
            if (owners.size() != 1) r.failure_reasons.emplace_back("[H-Min] the global minima are split across components");
            if (owners.size() == 1) {
                const SublevelComponent& c = comps[static_cast<std::size_t>(owners.front())];
                r.component_c = c;
                std::vector<char> in_c(g.size(), 0);
                for (std::size_t k : c.nodes) in_c[k] = 1;
                for (const auto& z : zs) {
                    if (!ties(z.f_value, level, 1e-9)) continue;
                    const std::size_t kb = g.nearest_node(z.location);
                    bool adjacent = false;
                    for (std::size_t nb : g.axis_neighbors(kb)) adjacent = adjacent || in_c[nb];
                    if (adjacent) r.boundary_contacts.push_back(z.location);
                }
                r.k0 = static_cast<int>(r.boundary_contacts.size());
            }
            r.h_min = all_touch && minima_inside && owners.size() == 1;
        } catch (const Error& e) {
            r.failure_reasons.emplace_back(std::string("[H-Min] ") + e.what());
        }
    }
    return r;
}

std::vector<CriticalPoint> Landscape::global_minima() const {
    std::vector<CriticalPoint> mins;
    for (const auto& c : critical_points)
        if (c.is_minimum()) mins.push_back(c);
    if (mins.empty()) throw Error(ErrorCode::InvalidArgument, "landscape has no interior minimum");
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& m : mins) fmin = std::min(fmin, m.f_value);
    std::vector<CriticalPoint> out;
    for (const auto& m : mins)
        if (ties(m.f_value, fmin, 1e-9)) out.push_back(m);
    return out;
}

CriticalPoint Landscape::x0() const { return global_minima().front(); }

std::optional<int> Landscape::channel_of(const Vec& x) const {
    if (zs.empty()) return std::nullopt;
    const Domain& d = grid.domain();
    const double s = d.boundary_coordinate(x);
    if (d.dim == 1) {
        for (std::size_t i = 0; i < zs.size(); ++i)
            if (zs[i].coordinate == s) return static_cast<int>(i);
        return std::nullopt;
    }
    for (std::size_t i = 0; i < zs.size(); ++i)
        if (zs[i].basin.contains(s)) return static_cast<int>(i);
    // separatrix hit: nearest z along the loop
    const double per = d.perimeter();
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zs.size(); ++i) {
        double dd = std::abs(zs[i].coordinate - s);
        dd = std::min(dd, per - dd);
        if (dd < bd) {
            bd = dd;
            best = static_cast<int>(i);
        }
    }
    return best;
}

Landscape analyze(const PotentialField& p, const DomainGrid& grid, bool with_report) {
    Landscape l{p, grid, {}, {}, std::nullopt};
    try {
        l.critical_points = find_critical_points(p, grid);
    } catch (const Error&) {
        // reported through the hypothesis report
    }
    // endpoints are always the boundary channels in d=1, even where f' vanishes
    l.zs = grid.dim() == 1 ? endpoint_minima(p, grid.domain()) : boundary_minima(p, grid);
    if (grid.dim() == 1) {
        std::stable_sort(l.zs.begin(), l.zs.end(),
                         [](const BoundaryMinimum& a, const BoundaryMinimum& b) { return a.f_value < b.f_value; });
        for (std::size_t i = 0; i < l.zs.size(); ++i) l.zs[i].rank = static_cast<int>(i + 1);
    }
    if (with_report) l.report = check_hypotheses(p, grid);
    return l;
}

}  // namespace exitlab
