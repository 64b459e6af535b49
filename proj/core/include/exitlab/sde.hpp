#pragma once

#include "exitlab/landscape.hpp"
#include "exitlab/rng.hpp"
#include "exitlab/spectral.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace exitlab {

struct SimConfig {
    double h = 0.3;
    double dt = 1e-4;
    std::uint64_t max_steps = 200'000'000;
    std::uint64_t seed = 0;
};

/// min(dx^2 / h, 1e-3)
double default_dt(const DomainGrid& grid, double h);

struct ExitEvent {
    double tau = 0.0;
    Vec exit_point = Vec::Zero();
    std::optional<int> channel;
    std::uint64_t steps = 0;
};

/// Maps an exit point to a channel index.
using ChannelMap = std::function<std::optional<int>(const Vec&)>;

/// Channels are the basins of the landscape's boundary minima (zs order).
ChannelMap landscape_channels(const Landscape& l);
/// d=1: channel 0 is the lower end, 1 the upper end.
ChannelMap endpoint_channels(const Domain& d);

/// x' = x - grad f(x) dt + sqrt(h dt) xi
Vec em_step(const Vec& x, const PotentialField& p, const SimConfig& cfg, Rng& rng);

/// Runs until the first iterate outside the domain; the exit point is the
/// intersection of the crossing step with the boundary.
ExitEvent sample_exit(const Vec& x0, const PotentialField& p, const Domain& domain, const ChannelMap& channels,
                      const SimConfig& cfg, Rng& rng);

/// Draw from the discrete QSD: inverse CDF in d=1, rejection in d=2, with a
/// uniform jitter inside the node's cell.
Vec sample_qsd(const SpectralSolution& sol, Rng& rng);

/// em_step followed by mirror reflections into the closed domain.
Vec reflected_step(const Vec& x, const PotentialField& p, const Domain& domain, const SimConfig& cfg, Rng& rng);

/// Reflects a point across violated faces; throws ReflectionLoop after 10.
Vec reflect_into(Vec x, const Domain& domain);

/// One exit per trajectory; trajectory i uses stream (seed, i) and starts at x0(i, rng).
std::vector<ExitEvent> run_exit_batch(std::size_t n, const std::function<Vec(std::size_t, Rng&)>& x0,
                                      const PotentialField& p, const Domain& domain, const ChannelMap& channels,
                                      const SimConfig& cfg);

}  // namespace exitlab
