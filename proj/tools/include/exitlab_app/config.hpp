#pragma once

#include "exitlab/domain.hpp"
#include "exitlab/error.hpp"
#include "exitlab/potential.hpp"
#include "exitlab/tad.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace exitlab::app {

/// Every schema violation found while parsing, as "key.path: message".
class SchemaError : public Error {
public:
    explicit SchemaError(std::vector<std::string> violations);
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct PotentialSpec {
    std::string catalog;  // empty for user potentials
    int dim = 1;
    bool gaussian = false;
    std::vector<Monomial> terms;
    std::vector<GaussianBump> bumps;
};

struct SimBlock {
    double dt = 0.0;  // 0: min(dx^2/h, 1e-3)
    std::uint64_t max_steps = 200'000'000;
    std::uint64_t n_replicas = 1000;
    std::optional<std::vector<double>> x0;  // unset: start from the QSD
};

struct TadBlock {
    double h_low = 0.15;
    double h_high = 0.5;
    double alpha = 0.05;
    double nu_min = 0.1;
    std::string restart_mode = "spectral_qsd";
    double burn_in = 1.0;
    double dt = 1e-4;
    std::uint64_t max_high_exits = 1'000'000;
};

struct KmcState {
    std::vector<double> rates;
    std::vector<int> targets;
};

struct KmcBlock {
    std::vector<double> rates;        // inline single-state rate table
    std::string rate_table_file;      // or a RateTable JSON written by `rates`/`qsd`
    std::uint64_t n_samples = 1000;
    std::vector<KmcState> states;     // optional multi-state chain
    std::vector<int> absorbing;
    int start = 0;
    double horizon = 100.0;
};

struct ExperimentConfig {
    PotentialSpec potential;
    std::optional<Domain> domain;
    int grid_nodes = 0;  // 0: 2048 (d=1) or 256 (d=2)
    std::optional<double> h;
    std::vector<double> h_list;
    SimBlock sim;
    double window_radius = 0.1;
    TadBlock tad;
    KmcBlock kmc;
    std::uint64_t seed = 20140101;

    [[nodiscard]] PotentialField field() const;
    [[nodiscard]] Domain resolved_domain() const;
    [[nodiscard]] DomainGrid grid() const;
    /// Throws SchemaError when no temperature was configured.
    [[nodiscard]] double temperature() const;
    [[nodiscard]] TadConfig tad_config() const;
};

/// Strict JSON schema: unknown keys and non-positive physical quantities are
/// rejected, all violations reported at once.
ExperimentConfig parse_config(const std::string& text);
/// Canonical JSON; parse_config(emit(c)) == c.
std::string emit(const ExperimentConfig& c);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

}  // namespace exitlab::app
