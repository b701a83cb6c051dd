#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qlink {

using Rng = std::mt19937_64;

namespace detail {

// splitmix64 finalizer
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Keyed derivation of a child seed from a master seed and a coordinate path.
/// Each coordinate is absorbed through a full avalanche round, so (seed, i, j)
/// and (seed, j, i) land on unrelated streams and no cell depends on how many
/// other cells exist.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = detail::mix64(master ^ 0x51a7e5eedULL);
    std::uint64_t depth = 0;
    for (auto k : path) {
        h = detail::mix64(h ^ detail::mix64(k + (++depth) * 0x632be59bd9b4e019ULL));
    }
    return h;
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

[[nodiscard]] inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Rng{derive_seed(master, path)};
}

} // namespace qlink
