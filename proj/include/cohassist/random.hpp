#pragma once

#include <cstdint>
#include <random>

#include "cohassist/qmat.hpp"

namespace cohassist {

/// SplitMix64 finalizer; used to derive independent child seeds from one user seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

/// Haar-like random isometry: orthonormalized columns of a complex Gaussian rows×cols matrix.
ComplexMatrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace cohassist
