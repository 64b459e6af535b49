#include "exitlab/kmc.hpp"

#include "exitlab/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace exitlab {

namespace {
double exponential(double rate, Rng& rng) { return -std::log(rng.uniform_open0()) / rate; }
}  // namespace

JumpSample sample_jump(const RateTable& rates, Rng& rng) {
    const double total = rates.total();
    if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalRate, "total rate is zero");
    JumpSample s;
    s.T = exponential(total, rng);
    const double u = rng.uniform() * total;
    double c = 0.0;
    s.Y = static_cast<int>(rates.size()) - 1;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        c += rates.rate(i);
        if (u < c) {
            s.Y = static_cast<int>(i);
            break;
        }
    }
    // never land on a zero-rate channel through round-off at the top end
    while (s.Y > 0 && rates.rate(static_cast<std::size_t>(s.Y)) == 0.0) --s.Y;
    return s;
}

JumpSample sample_jump_minexp(const RateTable& rates, Rng& rng) {
    if (!(rates.total() > 0.0)) throw Error(ErrorCode::ZeroTotalRate, "total rate is zero");
    JumpSample s{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double k = rates.rate(i);
        if (k <= 0.0) continue;
        const double t = exponential(k, rng);
        if (t < s.T) {
            s.T = t;
            s.Y = static_cast<int>(i);
        }
    }
    return s;
}

void StateGraph::validate() const {
    if (targets.size() != rates.size()) throw Error(ErrorCode::InvalidArgument, "targets/rates size mismatch");
    for (std::size_t s = 0; s < rates.size(); ++s) {
        rates[s].validate();
        if (targets[s].size() != rates[s].size())
            throw Error(ErrorCode::InvalidArgument, "one target per channel required");
        for (int t : targets[s])
            if (t < 0 || static_cast<std::size_t>(t) >= rates.size())
                throw Error(ErrorCode::InvalidArgument, "target state out of range");
        if (!absorbing.contains(static_cast<int>(s)) && !(rates[s].total() > 0.0))
            throw Error(ErrorCode::ZeroTotalRate, "state " + std::to_string(s) + " is not absorbing but has zero total rate");
    }
    for (int a : absorbing)
        if (a < 0 || static_cast<std::size_t>(a) >= rates.size())
            throw Error(ErrorCode::InvalidArgument, "absorbing state out of range");
}

std::vector<ChainStep> simulate_chain(const StateGraph& g, int start, double horizon, Rng& rng) {
    g.validate();
    if (start < 0 || static_cast<std::size_t>(start) >= g.size())
        throw Error(ErrorCode::InvalidArgument, "start state out of range");
    std::vector<ChainStep> traj{{start, 0.0}};
    int s = start;
    double t = 0.0;
    while (!g.absorbing.contains(s)) {
        const RateTable& r = g.rates[static_cast<std::size_t>(s)];
        if (!(r.total() > 0.0)) throw Error(ErrorCode::ZeroTotalRate, "non-absorbing state with zero total rate");
        const JumpSample j = sample_jump(r, rng);
        t += j.T;
        if (t > horizon) break;
        s = g.targets[static_cast<std::size_t>(s)][static_cast<std::size_t>(j.Y)];
        traj.push_back({s, t});
    }
    return traj;
}

}  // namespace exitlab
