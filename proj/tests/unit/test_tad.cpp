#include "common.hpp"

#include "exitlab/error.hpp"
#include "exitlab/harness.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/spectral.hpp"
#include "exitlab/stats.hpp"
#include "exitlab/tad.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace exitlab;
using testing_support::catalog_landscape;

TEST(TadConfig, ValidateRejectsBadParameters) {
    TadConfig c;
    EXPECT_NO_THROW(c.validate());
    c.h_low = 0.6;
    EXPECT_THROW(c.validate(), Error);
    c = TadConfig{};
    c.alpha = 1.0;
    EXPECT_THROW(c.validate(), Error);
    c = TadConfig{};
    c.nu_min = 0.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Extrapolate, EqualTemperaturesIdentity) { EXPECT_DOUBLE_EQ(extrapolate_time(3.7, 2.0, 0.4, 0.4), 3.7); }

TEST(Extrapolate, UnitSubstitution) {
    // 1/0.5 - 1/1 = 1
    EXPECT_NEAR(extrapolate_time(1.0, 1.0, 0.5, 1.0), std::exp(2.0), 1e-12);
    EXPECT_NEAR(std::exp(2.0), 7.389, 1e-3);
}

TEST(Extrapolate, MonotoneInBarrier) {
    double prev = 0;
    for (double df : {0.0, 0.1, 0.5, 1.0, 2.0}) {
        const double t = extrapolate_time(1.0, df, 0.15, 0.5);
        EXPECT_GT(t, prev);
        prev = t;
    }
    EXPECT_THROW((void)extrapolate_time(1.0, -0.1, 0.15, 0.5), Error);
}

TEST(StopTime, EqualTemperaturesGivesTauMin) {
    TadConfig c;
    c.h_low = c.h_high = 0.3;
    EXPECT_NEAR(stop_time(5.0, c), 5.0, 1e-12);
}

TEST(StopTime, IncreasesAsAlphaDecreases) {
    TadConfig c;
    double prev = 0;
    for (double a : {0.5, 0.2, 0.05, 0.01, 0.001}) {
        c.alpha = a;
        const double t = stop_time(1e3, c);
        EXPECT_GT(t, prev) << a;
        prev = t;
    }
}

TEST(Synthetic, MissRateWithinBound) {
    TadConfig c;
    const std::vector<SyntheticChannel> ch = {{0.1, 0.1}, {0.1, 0.25}};
    int miss = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(31, i);
        miss += synthetic_tad_trial(ch, c, rng).miss;
    }
    EXPECT_LE(static_cast<double>(miss) / n, 1.5 * c.alpha);
}

TEST(TadRun, DominantChannelAlwaysReturned) {
    // the far end sits ~3.9 above the near one: unreachable at both temperatures
    const PotentialField p = make_polynomial(1, {{1.0, 2, 0}});
    const Landscape l = analyze(p, DomainGrid::uniform(Domain::interval(-0.3, 2.0), 2048), false);
    TadConfig c;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    for (int i = 0; i < 50; ++i) {
        Rng rng = Rng::stream(41, i);
        const TadResult r = tad_run(l, c, eq, rng);
        EXPECT_EQ(r.Y, 0);
        EXPECT_GT(r.T, 0.0);
        EXPECT_LE(r.T_sim, r.T_stop);
    }
}

TEST(TadRun, P1ChannelsMatchSpectralExitLaw) {
    const Landscape l = catalog_landscape("P1", 2048, false);
    TadConfig c;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    const auto res = parallel_map(400, [&](std::size_t i) {
        Rng rng = Rng::stream(42, i);
        return tad_run(l, c, eq, rng).Y;
    });
    std::vector<double> counts(2, 0.0);
    for (int y : res) counts[y] += 1;
    const ExitLaw law = exit_law(principal_eigenpair(assemble_generator(l.potential, l.grid, 0.15)), make_windows(l, 0.1));
    EXPECT_GT(stats::chi2_goodness_of_fit(counts, law.probabilities).p_value, 0.01);
}

TEST(TadRun, AsymmetricWellMatchesDirectSimulation) {
    const Landscape l = catalog_landscape("asym-well", 2048, false);
    TadConfig c;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    const std::size_t n = 400;
    const auto tad = parallel_map(n, [&](std::size_t i) {
        Rng rng = Rng::stream(43, i);
        return tad_run(l, c, eq, rng).Y;
    });
    const SpectralSolution low = principal_eigenpair(assemble_generator(l.potential, l.grid, c.h_low));
    SimConfig sim{.h = c.h_low, .dt = 1e-4, .seed = 44};
    const auto direct = run_exit_batch(n, [&](std::size_t, Rng& r) { return sample_qsd(low, r); }, l.potential,
                                       l.grid.domain(), landscape_channels(l), sim);
    std::vector<double> a(2, 0.0), b(2, 0.0);
    for (int y : tad) a[y] += 1;
    for (const auto& e : direct) b[*e.channel] += 1;
    EXPECT_GT(stats::chi2_two_sample(a, b).p_value, 0.01);
}

TEST(TadRun, FirstSeenChannelsOnly) {
    const Landscape l = catalog_landscape("P1", 1024, false);
    TadConfig c;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    Rng rng(45);
    const TadResult r = tad_run(l, c, eq, rng);
    std::vector<int> seen;
    for (const auto& t : r.tau_table) seen.push_back(t.channel);
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
    EXPECT_GE(r.n_high_exits, r.tau_table.size());
}

TEST(TadRun, BudgetExceeded) {
    const Landscape l = catalog_landscape("P1", 1024, false);
    TadConfig c;
    c.sim.dt = 1e-3;
    c.alpha = 1e-12;
    c.max_high_exits = 2;
    const Equilibrator eq(l, c);
    Rng rng(46);
    try {
        (void)tad_run(l, c, eq, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
    }
}

TEST(Equilibrate, SpectralDrawsFollowHighTemperatureQsd) {
    const Landscape l = catalog_landscape("P1", 2048, false);
    TadConfig c;
    const Equilibrator eq(l, c);
    ASSERT_NE(eq.spectral(), nullptr);
    const SpectralSolution& s = *eq.spectral();
    Rng rng(47);
    std::vector<double> xs(5000);
    for (auto& x : xs) x = eq.draw(rng, std::nullopt)(0);
    std::vector<double> cum(s.grid.size() + 1, 0.0);
    for (std::size_t k = 0; k < s.grid.size(); ++k) cum[k + 1] = cum[k] + s.qsd[k];
    const double dx = s.grid.spacing(0), lo = s.grid.domain().lo[0];
    auto cdf = [&](double x) {
        const double u = (x - lo) / dx + 0.5;
        if (u <= 0) return 0.0;
        const auto k = static_cast<std::size_t>(std::min<double>(std::floor(u), s.grid.size() - 1.0));
        return cum[k] + std::min(1.0, u - k) * s.qsd[k];
    };
    EXPECT_GT(stats::ks_one_sample(xs, cdf).p_value, 0.05);
}

TEST(Equilibrate, ReflectedBurnInGivesExponentialExits) {
    const Landscape l = catalog_landscape("P1", 2048, false);
    // h_high must leave the well metastable (barrier 0.19) for a local equilibrium to exist
    TadConfig c;
    c.h_low = 0.1;
    c.h_high = 0.2;
    c.restart = RestartMode::ReflectedEquilibration;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    SimConfig sim{.h = c.h_high, .dt = 1e-4, .seed = 48};
    const auto ev = run_exit_batch(1000, [&](std::size_t, Rng& r) { return eq.draw(r, std::nullopt); },
                                   l.potential, l.grid.domain(), landscape_channels(l), sim);
    std::vector<double> tau;
    for (const auto& e : ev) tau.push_back(e.tau);
    const double lam = principal_eigenpair(assemble_generator(l.potential, l.grid, c.h_high)).lambda_h;
    EXPECT_GT(harness::ks_exponential(tau, lam).p_value, 0.05);
}

TEST(Equilibrate, FlatHighTemperatureFollowsGroundState) {
    // flat QSD on (-1,1) has density (pi/4) cos(pi x / 2)
    const Landscape l = analyze(catalog::flat(1), DomainGrid::uniform(Domain::interval(-1, 1), 2048), false);
    TadConfig c;
    c.h_low = 2.0;
    c.h_high = 5.0;
    const Equilibrator eq(l, c);
    Rng rng(49);
    const int n = 1'000'000;
    std::vector<double> dec(10, 0.0);
    for (int i = 0; i < n; ++i) dec[std::min(9, static_cast<int>((eq.draw(rng, std::nullopt)(0) + 1.0) * 5.0))] += 1;
    for (int k = 0; k < 10; ++k) {
        const double a = -1.0 + 0.2 * k, b = a + 0.2;
        const double expect = 0.5 * (std::sin(std::numbers::pi * b / 2) - std::sin(std::numbers::pi * a / 2));
        EXPECT_NEAR(dec[k] / n / expect, 1.0, 0.03) << k;
    }
}

TEST(Synthetic, ReturnedTimeFollowsLowTemperatureTotalRate) {
    TadConfig c;
    const std::vector<SyntheticChannel> ch = {{1.0, 0.1}, {2.0, 0.2}};
    double k = 0;
    for (const auto& x : ch) k += x.nu * std::exp(-2.0 * x.delta / c.h_low);
    std::vector<double> ts;
    for (int i = 0; i < 2000; ++i) {
        Rng rng = Rng::stream(50, i);
        ts.push_back(synthetic_tad_trial(ch, c, rng).T);
    }
    EXPECT_GT(harness::ks_exponential(ts, k).p_value, 0.05);
}

TEST(TadRun, EqualTemperaturesReturnFirstExit) {
    const Landscape l = catalog_landscape("P1", 1024, false);
    TadConfig c;
    c.h_low = c.h_high = 0.3;
    c.sim.dt = 1e-4;
    const Equilibrator eq(l, c);
    for (int i = 0; i < 20; ++i) {
        Rng rng = Rng::stream(51, i);
        const TadResult r = tad_run(l, c, eq, rng);
        EXPECT_EQ(r.n_high_exits, 1u);
        EXPECT_DOUBLE_EQ(r.T, r.T_sim);
        ASSERT_EQ(r.tau_table.size(), 1u);
        EXPECT_EQ(r.tau_table.front().channel, r.Y);
    }
}
