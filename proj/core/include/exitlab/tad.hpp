#pragma once

#include "exitlab/landscape.hpp"
#include "exitlab/sde.hpp"
#include "exitlab/spectral.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace exitlab {

enum class RestartMode { SpectralQsd, ReflectedEquilibration };

struct TadConfig {
    double h_low = 0.15;
    double h_high = 0.5;
    double alpha = 0.05;
    double nu_min = 0.1;
    SimConfig sim;  // sim.h is overridden by h_high
    RestartMode restart = RestartMode::SpectralQsd;
    double burn_in = 1.0;  // reflected mode only
    std::uint64_t max_high_exits = 1'000'000;

    void validate() const;
};

/// tau_high * exp(2 (1/h_low - 1/h_high) delta_f)
double extrapolate_time(double tau_high, double delta_f, double h_low, double h_high);

/// (ln(1/alpha)/nu_min) * (nu_min tau_min_low / ln(1/alpha))^(h_low/h_high)
double stop_time(double tau_min_low, const TadConfig& cfg);

struct TadChannelRecord {
    int channel = 0;
    double tau_high = 0.0;  // accumulated high-T time at first observation
    double tau_low = 0.0;
};

struct TadResult {
    double T = 0.0;
    int Y = 0;
    std::uint64_t n_high_exits = 0;
    double T_sim = 0.0;
    double T_stop = 0.0;
    std::vector<TadChannelRecord> tau_table;
    double speedup = 0.0;            // T / T_sim
    double speedup_reference = 0.0;  // exp(2 dF (1/h_low - 1/h_high)) for the lowest channel
};

/// Local equilibrium sampler at h_high. The spectral mode caches one solve.
class Equilibrator {
public:
    Equilibrator(const Landscape& l, const TadConfig& cfg);
    /// Next restart point; `previous` is where the last run left the domain.
    [[nodiscard]] Vec draw(Rng& rng, const std::optional<Vec>& previous) const;
    [[nodiscard]] const SpectralSolution* spectral() const noexcept { return sol_.get(); }

private:
    PotentialField p_;
    Domain domain_;
    TadConfig cfg_;
    Vec start_;
    std::shared_ptr<const SpectralSolution> sol_;
};

/// Single draw of the local equilibrium (constructs a fresh Equilibrator).
Vec equilibrate(const Landscape& l, const TadConfig& cfg, Rng& rng);

TadResult tad_run(const Landscape& l, const TadConfig& cfg, const Equilibrator& eq, Rng& rng);

/// Exponential-clock stand-in for the dynamics: channel j has rate
/// nu_j exp(-2 delta_j / h) at every temperature.
struct SyntheticChannel {
    double nu = 1.0;
    double delta = 0.0;
};

struct SyntheticTadOutcome {
    double T = 0.0;
    int Y = 0;
    double true_T = 0.0;
    int true_Y = 0;
    bool miss = false;  // an unseen channel would have beaten the returned one
};

SyntheticTadOutcome synthetic_tad_trial(std::span<const SyntheticChannel> channels, const TadConfig& cfg, Rng& rng);

}  // namespace exitlab
