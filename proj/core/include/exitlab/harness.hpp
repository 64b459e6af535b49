#pragma once

#include "exitlab/landscape.hpp"
#include "exitlab/rng.hpp"
#include "exitlab/sde.hpp"
#include "exitlab/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace exitlab::harness {

enum class Relation { Less, LessEq, Greater, GreaterEq, InRange };

struct Check {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    double threshold_hi = 0.0;  // InRange only
    Relation relation = Relation::LessEq;
    bool pass = false;
    std::uint64_t sample_size = 0;
    std::uint64_t seed = 0;
    bool advisory = false;  // reported, not counted in the suite verdict
    std::string note;
};

Check make_check(std::string name, double statistic, Relation rel, double threshold, double threshold_hi = 0.0);

struct TestReport {
    std::string suite;
    std::uint64_t master_seed = 0;
    std::vector<Check> checks;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] const Check* find(const std::string& name) const;
    [[nodiscard]] std::string json() const;
    /// Fixed-width table, one line per check.
    [[nodiscard]] std::string table() const;
};

/// One-sample KS against Exp(lambda). BadSample when N < 100 or a sample <= 0.
stats::TestResult ks_exponential(std::span<const double> samples, double lambda);

struct IndependenceResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  // a single channel observed: passes by vacuity
};

/// Chi-squared on the (exit-time quartile x channel) table. BadSample when N < 500.
IndependenceResult independence_test(std::span<const std::pair<double, int>> events);

struct QsdConvergenceOptions {
    std::size_t n_runs = 20000;
    double dt = 1e-4;
    int grid_nodes = 0;  // 0: 2048 (d=1) or 128 per axis (d=2)
    std::uint64_t seed = 1;
    std::size_t min_survivors = 200;
};

struct QsdConvergence {
    std::vector<double> times;
    std::vector<double> tv;
    std::vector<double> noise_floor;  // expected TV of an exact sample of the same size
    std::vector<std::size_t> survivors;
    stats::LinearFit fit;  // log TV against t over the points above twice the noise floor
    double lambda_h = 0.0;
};

/// TV distance between the survivors' histogram at each time and the QSD
/// (64 bins in d=1, 32x32 in d=2). TooFewSurvivors below min_survivors.
QsdConvergence qsd_convergence(const PotentialField& p, const Domain& domain,
                               const std::function<Vec(Rng&)>& x0, double h, std::span<const double> time_grid,
                               const QsdConvergenceOptions& opt = {});
QsdConvergence qsd_convergence(const PotentialField& p, const Domain& domain, const Vec& x0, double h,
                               std::span<const double> time_grid, const QsdConvergenceOptions& opt = {});

struct FwOptions {
    std::size_t n_runs = 1000;
    double dt = 1e-4;
    std::uint64_t max_steps = 50'000'000;
    std::uint64_t seed = 1;
};

struct FwFit {
    std::vector<double> h;
    std::vector<double> log_mean;  // ln E[tau] or ln(1/lambda_h)
    stats::LinearFit fit;          // against 1/h
    stats::LinearFit corrected;    // spectral only: ln(1/lambda_h) - 0.5 ln h against 1/h
};

/// Monte Carlo means of the exit time from x0; BudgetExceeded if a run hits max_steps.
FwFit fw_log_limit(const PotentialField& p, const Domain& domain, const Vec& x0, std::span<const double> h_list,
                   const FwOptions& opt = {});
/// Same fit with E[tau] replaced by 1/lambda_h.
FwFit fw_log_limit_spectral(const PotentialField& p, const DomainGrid& grid, std::span<const double> h_list);

std::vector<std::string> suite_names();
/// Throws UnknownSuite.
TestReport run_suite(const std::string& name, std::uint64_t master_seed = 20140101);

/// Seed of check `tag` under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept;

}  // namespace exitlab::harness
