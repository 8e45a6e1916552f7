#pragma once

#include <cstdint>
#include <random>

namespace courtforge {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive uncorrelated child seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    return mix_seed(mix_seed(master ^ mix_seed(stream)) + index);
}

}  // namespace courtforge
