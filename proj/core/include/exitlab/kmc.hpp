#pragma once

#include "exitlab/rates.hpp"
#include "exitlab/rng.hpp"

#include <optional>
#include <set>
#include <vector>

namespace exitlab {

struct JumpSample {
    double T = 0.0;
    int Y = 0;
};

/// T ~ Exp(sum k), Y ~ k / sum k, drawn independently.
JumpSample sample_jump(const RateTable& rates, Rng& rng);
/// (min_j tau_j, argmin_j tau_j) with tau_j ~ Exp(k_j); ties go to the lowest index.
JumpSample sample_jump_minexp(const RateTable& rates, Rng& rng);

/// Macroscopic states with one outgoing rate table each; entry `channel`
/// of state s's table jumps to targets[s][channel].
struct StateGraph {
    std::vector<RateTable> rates;
    std::vector<std::vector<int>> targets;
    std::set<int> absorbing;

    [[nodiscard]] std::size_t size() const noexcept { return rates.size(); }
    void validate() const;
};

struct ChainStep {
    int state = 0;
    double entry_time = 0.0;
};

/// Jumps until the horizon is passed or an absorbing state is entered.
std::vector<ChainStep> simulate_chain(const StateGraph& g, int start, double horizon, Rng& rng);

}  // namespace exitlab
