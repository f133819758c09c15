#pragma once

#include <cstdint>
#include <random>

namespace cqed {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for one shot of a multi-shot run.
/// The (seed, shot) pair is mixed with splitmix64 so neighbouring shot
/// indices do not produce correlated Mersenne Twister states.
Rng shot_rng(std::uint64_t seed, std::uint64_t shot);

/// Uniform double in [0, 1) from the top 53 bits of one draw. Used instead of
/// std::uniform_real_distribution so draws are identical across standard
/// library implementations.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace cqed
