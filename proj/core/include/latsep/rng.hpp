#pragma once

#include <cstdint>
#include <random>

namespace latsep {

// splitmix64 finalizer. All seed derivation in the project goes through
// this function so that independent streams can be re-derived externally.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for sub-stream `index` of a stream seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
// Used instead of std::uniform_real_distribution, whose output is
// implementation-defined.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace latsep
