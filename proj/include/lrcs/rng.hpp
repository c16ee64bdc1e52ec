#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lrcs {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: the child seed depends only on the base
/// seed and the ordered key list, never on how many other streams exist.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t key : keys) {
        h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
    }
    return h;
}

// Stream tags for the generators.
enum class StreamTag : std::uint64_t {
    kLeftFactor = 1,
    kRightFactor = 2,
    kSensing = 3,
    kNoise = 4,
    kMonteCarlo = 5,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(seed, {static_cast<std::uint64_t>(tag), index}));
}

}  // namespace lrcs
