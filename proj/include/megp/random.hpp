#pragma once

#include <cstdint>
#include <random>

namespace megp {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the `index`-th independent stream derived from `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    return splitmix64(base + index);
}

} // namespace megp
