#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spacs {

// Seed-splitting rule used everywhere a stochastic operation is sharded:
//
//   child(seed, stream) = splitmix64(seed + 0x9E3779B97F4A7C15 * (stream + 1))
//
// Each shard (herald block, phase, pipeline stage) owns one stream index, so
// results do not depend on how shards are distributed over threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Thin wrapper over mt19937_64 whose variates are defined bit-for-bit here
// rather than by the standard library's distribution classes.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    // Independent child generator; does not advance this one.
    Rng split(std::uint64_t stream) const { return Rng(split_seed(seed_, stream)); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe to take the logarithm of.
    double uniform_open0() { return 1.0 - uniform(); }

    // Number of failures before the first success of a Bernoulli(p) process.
    std::uint64_t geometric(double p) {
        if (p >= 1.0) return 0;
        double g = std::floor(std::log(uniform_open0()) / std::log1p(-p));
        if (!(g < 1.8e19)) return UINT64_MAX;
        return static_cast<std::uint64_t>(g);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace spacs
