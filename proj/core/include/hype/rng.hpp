#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hype {

/// Mersenne Twister with distributions written out explicitly, so a seed
/// gives the same numbers with every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_positive() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    /// Exp(1) by inversion.
    double exponential() { return -std::log(uniform_positive()); }

  private:
    std::mt19937_64 engine_;
};

/// SplitMix64 step: the i-th output of the generator started at `seed`
/// is the seed of run i in an ensemble.
[[nodiscard]] inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace hype
