#pragma once

#include <cstdint>

#include "hdinf/gauss.hpp"

namespace hdinf {

// SplitMix64 finalizer: a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Derives an independent stream seed from a parent seed and a stream index.
// Replicate r of an experiment uses derive_seed(master_seed, r), so every
// replicate is its own deterministic stream regardless of worker scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// Counter-based uniform generator: value k of a stream is a pure function of
// (seed, k). No shared state, identical output on any platform with 64-bit
// integers and IEEE doubles.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return mix64(seed_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // uniform on the open interval (0,1)
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via inverse CDF of a (0,1) uniform
    double next_normal() { return inverse_normal_cdf(next_uniform()); }

    // uniform integer in [0, bound) by rejection; bound must be > 0
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace hdinf
