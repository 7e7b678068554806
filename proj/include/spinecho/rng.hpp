#pragma once

#include <cstdint>
#include <random>

namespace spinecho {

using Rng = std::mt19937_64;

/// Independent sub-streams of one realization.
enum class Stream : std::uint64_t {
    Positions = 1,
    Fields = 2,
    State = 3,
    PulseSpin = 4,
    PulseTime = 5,
    Calibration = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: a pure function of (master, index, stream),
/// so realization i never depends on how many draws realization i-1 made.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    Stream stream) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return h;
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, Stream stream) {
    return Rng{derive_seed(master, index, stream)};
}

/// Uniform double in [0, 1) from a single counter value.
constexpr double counter_uniform(std::uint64_t key) noexcept {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace spinecho
