#include "exitlab/sde.hpp"

#include "exitlab/error.hpp"
#include "exitlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace exitlab {

double default_dt(const DomainGrid& grid, double h) {
    double dx = grid.spacing(0);
    if (grid.dim() == 2) dx = std::min(dx, grid.spacing(1));
    return std::min(dx * dx / h, 1e-3);
}

ChannelMap landscape_channels(const Landscape& l) {
    auto shared = std::make_shared<const Landscape>(l);
    return [shared](const Vec& x) { return shared->channel_of(x); };
}

ChannelMap endpoint_channels(const Domain& d) {
    return [d](const Vec& x) -> std::optional<int> {
        return std::abs(x(0) - d.lo[0]) <= std::abs(x(0) - d.hi[0]) ? 0 : 1;
    };
}

Vec em_step(const Vec& x, const PotentialField& p, const SimConfig& cfg, Rng& rng) {
    const double s = std::sqrt(cfg.h * cfg.dt);
    Vec out = x - p.grad(x) * cfg.dt;
    out(0) += s * rng.normal();
    if (p.dimension() == 2) out(1) += s * rng.normal();
    return out;
}

ExitEvent sample_exit(const Vec& x0, const PotentialField& p, const Domain& domain, const ChannelMap& channels,
                      const SimConfig& cfg, Rng& rng) {
    if (!domain.contains(x0)) throw Error(ErrorCode::InvalidArgument, "start point outside the domain");
    Vec x = x0;
    for (std::uint64_t n = 1; n <= cfg.max_steps; ++n) {
        const Vec y = em_step(x, p, cfg, rng);
        if (domain.contains(y)) {
            x = y;
            continue;
        }
        // fraction of the step at which the segment leaves the box
        double theta = 1.0;
        for (int k = 0; k < domain.dim; ++k) {
            const double dk = y(k) - x(k);
            if (y(k) <= domain.lo[k] && dk != 0.0) theta = std::min(theta, (domain.lo[k] - x(k)) / dk);
            if (y(k) >= domain.hi[k] && dk != 0.0) theta = std::min(theta, (domain.hi[k] - x(k)) / dk);
        }
        theta = std::clamp(theta, 0.0, 1.0);
        Vec e = x + theta * (y - x);
        for (int k = 0; k < domain.dim; ++k) e(k) = std::clamp(e(k), domain.lo[k], domain.hi[k]);
        e = domain.project_to_boundary(e);
        ExitEvent ev;
        ev.tau = (static_cast<double>(n - 1) + theta) * cfg.dt;
        ev.exit_point = e;
        ev.channel = channels ? channels(e) : std::nullopt;
        ev.steps = n;
        return ev;
    }
    throw Error(ErrorCode::MaxStepsExceeded, "no exit within " + std::to_string(cfg.max_steps) + " steps");
}

Vec sample_qsd(const SpectralSolution& sol, Rng& rng) {
    const DomainGrid& g = sol.grid;
    const Domain& d = g.domain();
    std::size_t k = 0;
    if (d.dim == 1) {
        const double u = rng.uniform();
        double c = 0.0;
        k = g.interior_nodes().back();
        for (std::size_t j : g.interior_nodes()) {
            c += sol.qsd[j];
            if (u < c) {
                k = j;
                break;
            }
        }
    } else {
        const double qmax = *std::max_element(sol.qsd.begin(), sol.qsd.end());
        const auto& in = g.interior_nodes();
        for (;;) {
            const std::size_t j = in[std::min(in.size() - 1, static_cast<std::size_t>(rng.uniform() * in.size()))];
            if (rng.uniform() * qmax < sol.qsd[j]) {
                k = j;
                break;
            }
        }
    }
    Vec x = g.point(k);
    for (int a = 0; a < d.dim; ++a) {
        x(a) += (rng.uniform() - 0.5) * g.spacing(a);
        // stay strictly inside
        x(a) = std::clamp(x(a), std::nextafter(d.lo[a], d.hi[a]), std::nextafter(d.hi[a], d.lo[a]));
    }
    return x;
}

Vec reflect_into(Vec x, const Domain& domain) {
    for (int count = 0; count <= 10; ++count) {
        bool inside = true;
        for (int k = 0; k < domain.dim; ++k) {
            if (x(k) < domain.lo[k]) {
                x(k) = 2.0 * domain.lo[k] - x(k);
                inside = false;
                break;
            }
            if (x(k) > domain.hi[k]) {
                x(k) = 2.0 * domain.hi[k] - x(k);
                inside = false;
                break;
            }
        }
        if (inside) return x;
    }
    throw Error(ErrorCode::ReflectionLoop, "more than 10 reflections in one step");
}

Vec reflected_step(const Vec& x, const PotentialField& p, const Domain& domain, const SimConfig& cfg, Rng& rng) {
    return reflect_into(em_step(x, p, cfg, rng), domain);
}

std::vector<ExitEvent> run_exit_batch(std::size_t n, const std::function<Vec(std::size_t, Rng&)>& x0,
                                      const PotentialField& p, const Domain& domain, const ChannelMap& channels,
                                      const SimConfig& cfg) {
    return parallel_map(n, [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.seed, i);
        const Vec start = x0(i, rng);
        return sample_exit(start, p, domain, channels, cfg, rng);
    });
}

}  // namespace exitlab
