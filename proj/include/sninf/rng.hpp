#pragma once

#include <cstdint>
#include <random>

namespace sninf {

/// splitmix64 finalizer; a bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (seed, stream). Every replication
/// draws from its own stream, so results do not depend on scheduling.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

[[nodiscard]] inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(stream_seed(seed, stream));
}

}  // namespace sninf
