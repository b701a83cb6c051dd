#pragma once

#include "qlink/error.hpp"
#include "qlink/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qlink {

using Sign = std::int8_t;

/// Sign of a value with zero counted as positive.
[[nodiscard]] constexpr Sign sign_of(double x) noexcept { return x >= 0.0 ? Sign{1} : Sign{-1}; }

[[nodiscard]] inline std::vector<Sign> realized_sign(std::span<const double> returns) {
    std::vector<Sign> s(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        s[t] = sign_of(returns[t]);
    }
    return s;
}

/// Synthetic direction forecasts. dhat[t] equals the realized sign exactly
/// where correct[t] is 1.
struct SignPath {
    std::vector<Sign> dhat;
    std::vector<std::uint8_t> correct;
    double target_p = 0.5;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return dhat.size(); }

    friend bool operator==(const SignPath&, const SignPath&) = default;
};

/// Each date independently keeps the realized sign with probability p and
/// flips it otherwise. Exactly one uniform draw is consumed per date, and the
/// magnitudes of the returns are never consulted.
[[nodiscard]] inline SignPath gen_sign_path(std::span<const Sign> realized, double p, Rng& rng) {
    if (!(p >= 0.5 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "signgen", "target accuracy must lie in [0.5, 1], got " + std::to_string(p));
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SignPath path;
    path.target_p = p;
    path.dhat.resize(realized.size());
    path.correct.resize(realized.size());
    for (std::size_t t = 0; t < realized.size(); ++t) {
        const bool hit = unif(rng) < p;
        path.correct[t] = hit ? 1 : 0;
        path.dhat[t] = hit ? realized[t] : static_cast<Sign>(-realized[t]);
    }
    return path;
}

/// Convenience overload that owns its generator.
[[nodiscard]] inline SignPath gen_sign_path(std::span<const Sign> realized, double p, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    auto path = gen_sign_path(realized, p, rng);
    path.seed = seed;
    return path;
}

/// `levels` evenly spaced accuracies from 0.50 to 1.00 inclusive.
[[nodiscard]] inline std::vector<double> accuracy_grid(std::size_t levels) {
    if (levels < 2) {
        throw Error(ErrorCode::InvalidConfig, "signgen", "accuracy grid needs at least 2 levels");
    }
    std::vector<double> grid(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        grid[i] = 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(levels - 1);
    }
    return grid;
}

} // namespace qlink
