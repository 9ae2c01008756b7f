#pragma once

// Small integer mixers used wherever a reproducible pseudo-random stream is
// needed without global RNG state.

#include <cstdint>
#include <string_view>

namespace ptm::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stateless variant: the n-th output of the stream seeded with `seed`.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t n) noexcept
{
    std::uint64_t state = seed + n * 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
}

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Top 53 bits as a double in [0, 1).
inline double unit_interval(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1p-53;
}

} // namespace ptm::detail
