#pragma once

#include "qlink/error.hpp"
#include "qlink/signgen.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qlink {

/// Type1: OLS-scaled sign * volatility. Type2: constant ratio-of-means scaling.
/// Type3: OLS-scaled with a weight of 1.5 on correct dates and 0.5 otherwise.
enum class ForecastKind { Type1 = 1, Type2 = 2, Type3 = 3 };

inline constexpr double kTimingWeightCorrect = 1.5;
inline constexpr double kTimingWeightWrong = 0.5;

[[nodiscard]] constexpr std::string_view to_string(ForecastKind k) noexcept {
    switch (k) {
    case ForecastKind::Type1: return "type1";
    case ForecastKind::Type2: return "type2";
    case ForecastKind::Type3: return "type3";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<ForecastKind> parse_forecast_kind(std::string_view s) {
    if (s == "1" || s == "type1") return ForecastKind::Type1;
    if (s == "2" || s == "type2") return ForecastKind::Type2;
    if (s == "3" || s == "type3") return ForecastKind::Type3;
    return std::nullopt;
}

struct ForecastSeries {
    std::vector<double> mu;
    ForecastKind kind = ForecastKind::Type1;
    double lambda = 0.0;
    /// Populated for Type3 only.
    std::vector<double> weights;
};

/// No-intercept least squares: argmin_l sum (target - l * regressor)^2.
[[nodiscard]] inline double lambda_ols(std::span<const double> targets, std::span<const double> regressor) {
    if (targets.size() != regressor.size()) {
        throw Error(ErrorCode::MisalignedInputs, "forecast", "targets and regressor differ in length");
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        sxy += targets[t] * regressor[t];
        sxx += regressor[t] * regressor[t];
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorCode::ZeroRegressor, "forecast", "regressor is identically zero");
    }
    return sxy / sxx;
}

/// mean(|returns|) / mean(vols).
[[nodiscard]] inline double lambda_const(std::span<const double> abs_returns, std::span<const double> vols) {
    if (abs_returns.size() != vols.size() || vols.empty()) {
        throw Error(ErrorCode::MisalignedInputs, "forecast", "abs_returns and vols must be non-empty and aligned");
    }
    double sa = 0.0;
    double sv = 0.0;
    for (std::size_t t = 0; t < vols.size(); ++t) {
        sa += abs_returns[t];
        sv += vols[t];
    }
    if (!(sv > 0.0)) {
        throw Error(ErrorCode::ZeroVolatility, "forecast", "mean volatility is not positive");
    }
    return sa / sv;
}

[[nodiscard]] inline std::vector<double> timing_weights(const SignPath& signs) {
    std::vector<double> w(signs.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
        w[t] = signs.correct[t] ? kTimingWeightCorrect : kTimingWeightWrong;
    }
    return w;
}

/// The unscaled forecast shape dhat * sigma (* w for Type3); lambda multiplies it.
[[nodiscard]] inline std::vector<double> forecast_regressor(ForecastKind kind, const SignPath& signs,
                                                            std::span<const double> vols) {
    if (signs.dhat.size() != vols.size() || signs.correct.size() != vols.size()) {
        throw Error(ErrorCode::MisalignedInputs, "forecast",
                    "sign path has " + std::to_string(signs.dhat.size()) + " dates, volatility path " +
                        std::to_string(vols.size()));
    }
    std::vector<double> x(vols.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] = static_cast<double>(signs.dhat[t]) * vols[t];
        if (kind == ForecastKind::Type3) {
            x[t] *= signs.correct[t] ? kTimingWeightCorrect : kTimingWeightWrong;
        }
    }
    return x;
}

[[nodiscard]] inline ForecastSeries build_forecast(ForecastKind kind, const SignPath& signs, std::span<const double> vols,
                                                   double lambda) {
    ForecastSeries f;
    f.kind = kind;
    f.lambda = lambda;
    f.mu = forecast_regressor(kind, signs, vols);
    for (double& m : f.mu) {
        m *= lambda;
    }
    if (kind == ForecastKind::Type3) {
        f.weights = timing_weights(signs);
    }
    return f;
}

/// Scaling factor for `kind` estimated on a window: OLS of the targets on the
/// kind's regressor for Type1/Type3, ratio of means for Type2.
[[nodiscard]] inline double estimate_lambda(ForecastKind kind, std::span<const double> targets, const SignPath& signs,
                                            std::span<const double> vols) {
    if (kind == ForecastKind::Type2) {
        std::vector<double> abs_r(targets.size());
        for (std::size_t t = 0; t < targets.size(); ++t) {
            abs_r[t] = std::abs(targets[t]);
        }
        return lambda_const(abs_r, vols);
    }
    return lambda_ols(targets, forecast_regressor(kind, signs, vols));
}

} // namespace qlink
