#pragma once

#include <cstdint>
#include <random>

namespace exitlab {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Random stream for one trajectory / replica.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    /// Stream number `index` of master seed `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    double normal() { return normal_(engine_); }
    /// Uniform on [0,1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    /// Uniform on (0,1], safe for logarithms.
    double uniform_open0() { return 1.0 - uniform(); }
    std::uint64_t bits() { return engine_(); }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace exitlab
