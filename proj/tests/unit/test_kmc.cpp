#include "exitlab/error.hpp"
#include "exitlab/harness.hpp"
#include "exitlab/kmc.hpp"
#include "exitlab/stats.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace exitlab;

namespace {

// expected jumps to absorption from state 0 by first-step analysis
constexpr double kMeanJumpsThreeState = 6.0;

RateTable table(std::vector<double> k) { return RateTable::from_rates(k, Provenance::User); }

StateGraph three_state() {
    StateGraph g;
    g.rates = {table({2.0}), table({1.0, 0.5}), table({})};
    g.targets = {{1}, {0, 2}, {}};
    g.absorbing = {2};
    return g;
}

}  // namespace

TEST(SampleJump, ChannelProbabilityAndMeanTime) {
    const RateTable t = table({1.0, 3.0});
    const int n = 100000;
    double y1 = 0, sum_t = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(5, i);
        const JumpSample s = sample_jump(t, rng);
        y1 += s.Y == 1;
        sum_t += s.T;
        ASSERT_GT(s.T, 0.0);
    }
    EXPECT_NEAR(y1 / n, 0.75, 3 * std::sqrt(0.75 * 0.25 / n));
    EXPECT_NEAR(sum_t / n, 0.25, 3 * 0.25 / std::sqrt(n));
}

TEST(SampleJump, TimeIndependentOfChannel) {
    const RateTable t = table({1.0, 3.0});
    std::vector<std::pair<double, int>> ev;
    Rng rng(9);
    for (int i = 0; i < 100000; ++i) {
        const JumpSample s = sample_jump(t, rng);
        ev.emplace_back(s.T, s.Y);
    }
    EXPECT_GT(harness::independence_test(ev).p_value, 0.01);
}

TEST(SampleJump, ZeroTotalRateThrows) {
    Rng rng(1);
    try {
        (void)sample_jump(table({0.0, 0.0}), rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroTotalRate);
    }
}

TEST(SampleJumpMinexp, SingleChannelIsExponential) {
    const RateTable t = table({2.0});
    Rng rng(3);
    std::vector<double> ts;
    for (int i = 0; i < 5000; ++i) {
        const JumpSample s = sample_jump_minexp(t, rng);
        ASSERT_EQ(s.Y, 0);
        ts.push_back(s.T);
    }
    EXPECT_GT(harness::ks_exponential(ts, 2.0).p_value, 0.01);
}

TEST(SampleJumpMinexp, MinimumOfExponentials) {
    const RateTable t = table({1.0, 3.0});
    Rng rng(4);
    std::vector<double> ts;
    for (int i = 0; i < 5000; ++i) ts.push_back(sample_jump_minexp(t, rng).T);
    EXPECT_GT(harness::ks_exponential(ts, 4.0).p_value, 0.01);
}

TEST(SampleJumpMinexp, EquivalentToDirectSampler) {
    const RateTable t = table({1.0, 3.0, 0.5});
    const int n = 100000;
    std::vector<double> ta, tb, ya(3, 0.0), yb(3, 0.0);
    Rng ra(21), rb(22);
    for (int i = 0; i < n; ++i) {
        const JumpSample a = sample_jump(t, ra);
        const JumpSample b = sample_jump_minexp(t, rb);
        ta.push_back(a.T);
        tb.push_back(b.T);
        ya[a.Y] += 1;
        yb[b.Y] += 1;
    }
    EXPECT_GT(stats::ks_two_sample(ta, tb).p_value, 0.01);
    EXPECT_GT(stats::chi2_two_sample(ya, yb).p_value, 0.01);
}

TEST(Chain, SymmetricTwoStateOccupation) {
    StateGraph g;
    g.rates = {table({1.0}), table({1.0})};
    g.targets = {{1}, {0}};
    Rng rng(6);
    const double horizon = 1e4;
    const auto path = simulate_chain(g, 0, horizon, rng);
    double occ0 = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double end = std::min(path[i + 1].entry_time, horizon);
        if (path[i].state == 0) occ0 += end - path[i].entry_time;
        if (path[i + 1].entry_time > horizon) break;
    }
    EXPECT_NEAR(occ0 / horizon, 0.5, 0.02);
    for (std::size_t i = 1; i < path.size(); ++i) EXPECT_GT(path[i].entry_time, path[i - 1].entry_time);
}

TEST(Chain, AbsorptionReached) {
    const StateGraph g = three_state();
    for (int s = 0; s < 50; ++s) {
        Rng rng = Rng::stream(7, s);
        const auto path = simulate_chain(g, 0, 1e12, rng);
        EXPECT_EQ(path.back().state, 2);
    }
}

TEST(Chain, MeanJumpsFromFirstStepAnalysis) {
    // N = 1 + P N over the transient states {0, 1}
    Eigen::Matrix2d p;
    p << 0.0, 1.0, 1.0 / 1.5, 0.0;
    const Eigen::Vector2d n = (Eigen::Matrix2d::Identity() - p).lu().solve(Eigen::Vector2d::Ones());
    EXPECT_NEAR(n(0), kMeanJumpsThreeState, 1e-12);

    const StateGraph g = three_state();
    const int runs = 20000;
    double m = 0, m2 = 0;
    for (int s = 0; s < runs; ++s) {
        Rng rng = Rng::stream(8, s);
        const double jumps = static_cast<double>(simulate_chain(g, 0, 1e12, rng).size() - 1);
        m += jumps;
        m2 += jumps * jumps;
    }
    m /= runs;
    const double sd = std::sqrt((m2 / runs - m * m) / runs);
    EXPECT_NEAR(m, kMeanJumpsThreeState, 3 * sd);
}

TEST(Chain, ValidateRejectsDeadState) {
    StateGraph g;
    g.rates = {table({0.0}), table({1.0})};
    g.targets = {{1}, {0}};
    try {
        g.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroTotalRate);
    }
    g.absorbing = {0};
    EXPECT_NO_THROW(g.validate());
}
