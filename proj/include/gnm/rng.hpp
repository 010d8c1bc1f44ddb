#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace gnm {

// All randomness flows through std::mt19937_64, whose output sequence is
// fixed by the standard. The distributions below are written out by hand
// because the std:: distribution objects are implementation-defined, and
// results must be identical across standard libraries.
using Rng = std::mt19937_64;

// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for the stream identified by (master, k0, k1, ...). Changing any
// coordinate gives an unrelated stream; ordering of evaluation is irrelevant.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(master, keys));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer on [0, n). Rejection keeps it exactly unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Exponential with the given rate (> 0).
inline double exponential(Rng& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

// Number of failures before the first success of a Bernoulli(p) sequence,
// 0 < p < 1. Used to skip over runs of zero bits in sparse rasters.
inline std::uint64_t geometric_skip(Rng& rng, double p) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    return k > 1e18 ? std::uint64_t{1000000000000000000ULL} : static_cast<std::uint64_t>(k);
}

}  // namespace gnm
