#pragma once

#include "qlink/error.hpp"
#include "qlink/forecast.hpp"
#include "qlink/signgen.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace qlink {

struct MetricPoint {
    double target_p = 0.0;
    std::size_t level = 0;
    std::size_t replication = 0;
    ForecastKind kind = ForecastKind::Type1;
    double da = 0.0;
    double r2_oos = 0.0;

    friend bool operator==(const MetricPoint&, const MetricPoint&) = default;
};

struct KappaEstimate {
    double kappa_hat = 0.0;
    /// Mean absolute standardized residual over the window.
    double z_bar = 0.0;
    std::size_t t_oos = 0;
};

namespace detail {

inline void require_aligned(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorCode::LengthMismatch, "metrics",
                    std::string(what) + ": lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
}

} // namespace detail

/// Share of dates where the forecast and the realized return have the same
/// sign, zeros counted as positive on both sides.
[[nodiscard]] inline double directional_accuracy(std::span<const double> actual, std::span<const double> mu) {
    detail::require_aligned(actual, mu, "directional_accuracy");
    std::size_t hits = 0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        hits += sign_of(actual[t]) == sign_of(mu[t]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(actual.size());
}

/// 1 - SSE(mu) / SSE(0): out-of-sample R^2 against the zero-drift random walk,
/// whose return forecast is identically zero.
[[nodiscard]] inline double r2_oos(std::span<const double> actual, std::span<const double> mu) {
    detail::require_aligned(actual, mu, "r2_oos");
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double e = actual[t] - mu[t];
        sse += e * e;
        sst += actual[t] * actual[t];
    }
    if (!(sst > 0.0)) {
        throw Error(ErrorCode::DegenerateDenominator, "metrics", "every realized return is zero");
    }
    return 1.0 - sse / sst;
}

/// z_bar = mean(|r_t| / sigma_t); kappa_hat = sum((sigma_t * z_bar)^2) / sum(r_t^2).
[[nodiscard]] inline KappaEstimate kappa_hat(std::span<const double> actual, std::span<const double> vols) {
    detail::require_aligned(actual, vols, "kappa_hat");
    double abs_z = 0.0;
    double sum_r2 = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        if (!(vols[t] > 0.0)) {
            throw Error(ErrorCode::ZeroVolatility, "metrics", "non-positive volatility at index " + std::to_string(t));
        }
        abs_z += std::abs(actual[t]) / vols[t];
        sum_r2 += actual[t] * actual[t];
    }
    if (!(sum_r2 > 0.0)) {
        throw Error(ErrorCode::DegenerateDenominator, "metrics", "every realized return is zero");
    }
    const double z_bar = abs_z / static_cast<double>(actual.size());
    double num = 0.0;
    for (double s : vols) {
        const double m = s * z_bar;
        num += m * m;
    }
    return {num / sum_r2, z_bar, actual.size()};
}

/// Quadratic benchmark kappa * (2 * da - 1)^2.
[[nodiscard]] constexpr double theoretical_r2(double da, double kappa) noexcept {
    const double edge = 2.0 * da - 1.0;
    return kappa * edge * edge;
}

} // namespace qlink
