#pragma once

#include <cstdint>
#include <random>

namespace somscreen {

/// Seeded generator whose output does not depend on the standard library's
/// distribution implementations, so runs reproduce across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t index(std::uint64_t n);

    /// Standard normal deviate (Box-Muller, one value per call).
    double normal();

private:
    std::mt19937_64 engine_;
};

/// Mixes a master seed with a stream id (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace somscreen
