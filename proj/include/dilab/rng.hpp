#pragma once

#include <cstdint>
#include <random>

namespace dilab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer applied to (root, stream); gives independent child seeds.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) noexcept
{
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t root, std::uint64_t stream = 0) { return Rng(derive_seed(root, stream)); }

} // namespace dilab
