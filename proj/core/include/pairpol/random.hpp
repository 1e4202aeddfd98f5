#pragma once

#include <cstdint>
#include <random>

namespace pairpol {

//! Random stream used throughout the simulation. One per worker/chunk.
using Rng = std::mt19937_64;

//! Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

//! SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/*!
 * Derive the seed of independent stream `index` from a master seed.
 *
 * Streams depend only on (seed, index), never on how many workers consume
 * them, which is what makes runs reproducible across worker counts.
 */
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(seed + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index)
{
    return Rng{split_seed(seed, index)};
}

}  // namespace pairpol
