#pragma once

#include <cstdint>

// Deterministic, platform-independent randomness. Everything downstream
// (graph sampling, chain updates, replica seeds) is derived from 64-bit
// integer mixing only, so identical seeds give identical runs on any host.

namespace dising::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: full-avalanche 64->64 bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// n-th value of the SplitMix64 stream started at `seed`. Used both as a
// counter-based generator and to derive independent sub-seeds:
// replica r uses derive(baseSeed, r).
inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t n) {
    return mix64(seed + (n + 1) * kGolden);
}

// Map 64 random bits to a double in [0,1) with 53-bit resolution.
inline constexpr double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Minimal counter-based stream for sequential consumers (MCMC).
class Stream {
public:
    explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    constexpr double next_unit() { return to_unit(next_u64()); }

    // Uniform index in [0,n) via 128-bit multiply (bias < n/2^64).
    constexpr std::uint32_t next_index(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

}  // namespace dising::rng
