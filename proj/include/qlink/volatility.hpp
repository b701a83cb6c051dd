#pragma once

#include "qlink/error.hpp"
#include "qlink/ingest.hpp"
#include "qlink/optim.hpp"
#include "qlink/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qlink {

/// Zero-mean GARCH(1,1): sigma2[t] = omega + alpha * r[t-1]^2 + beta * sigma2[t-1].
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    [[nodiscard]] bool valid() const noexcept {
        return omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0 && std::isfinite(omega);
    }

    void validate() const {
        if (!valid()) {
            throw Error(ErrorCode::InvalidParams, "volatility",
                        "need omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1 (got " + std::to_string(omega) +
                            ", " + std::to_string(alpha) + ", " + std::to_string(beta) + ")");
        }
    }

    [[nodiscard]] double unconditional_variance() const noexcept { return omega / (1.0 - alpha - beta); }

    friend bool operator==(const GarchParams&, const GarchParams&) = default;
};

/// Recursion state carried into the next date: last squared return and last
/// conditional variance.
struct GarchState {
    double r_sq = 0.0;
    double sigma_sq = 0.0;
};

struct GarchFit {
    GarchParams params;
    std::vector<double> sigma;
    std::vector<double> z;
    double log_likelihood = 0.0;
    /// Window length used for estimation; 0 for a filtered (not fitted) window.
    std::size_t n_in_sample = 0;
    /// Pre-sample variance that seeded the recursion.
    double sigma0_sq = 0.0;
    std::vector<std::string> warnings;

    /// State after the last date of this window, for continuing the recursion.
    [[nodiscard]] GarchState last_state(std::span<const double> returns) const {
        const double r = returns.back();
        return {r * r, sigma.back() * sigma.back()};
    }
};

inline constexpr std::size_t kGarchMinObservations = 20;
inline constexpr std::size_t kGarchRecommendedObservations = 100;

/// One-step-ahead conditional variances: out[t] uses returns strictly before t.
[[nodiscard]] inline std::vector<double> garch_variance_path(const GarchParams& p, GarchState state,
                                                             std::span<const double> returns) {
    std::vector<double> out(returns.size());
    double r_sq = state.r_sq;
    double s2 = state.sigma_sq;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        s2 = p.omega + p.alpha * r_sq + p.beta * s2;
        out[t] = s2;
        r_sq = returns[t] * returns[t];
    }
    return out;
}

/// Gaussian log-likelihood of the zero-mean model over `returns`.
[[nodiscard]] inline double garch_log_likelihood(const GarchParams& p, GarchState state,
                                                 std::span<const double> returns) {
    constexpr double log_2pi = 1.8378770664093454836;
    double ll = 0.0;
    double r_sq = state.r_sq;
    double s2 = state.sigma_sq;
    for (double r : returns) {
        s2 = p.omega + p.alpha * r_sq + p.beta * s2;
        r_sq = r * r;
        ll -= 0.5 * (log_2pi + std::log(s2) + r_sq / s2);
    }
    return ll;
}

/// Mean of squared returns (the zero-mean variance), used as the pre-sample state.
[[nodiscard]] inline double zero_mean_variance(std::span<const double> returns) {
    double s = 0.0;
    for (double r : returns) {
        s += r * r;
    }
    return s / static_cast<double>(returns.size());
}

/// Runs the recursion with fixed parameters across a window and attaches
/// sigma and standardized residuals. No return at or after t enters sigma[t].
[[nodiscard]] inline GarchFit filter_oos(const GarchParams& params, GarchState state, const ReturnSeries& window) {
    params.validate();
    if (!(state.r_sq >= 0.0) || !(state.sigma_sq > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "volatility", "recursion state must be positive");
    }
    auto r = window.values();
    auto var = garch_variance_path(params, state, r);
    GarchFit fit;
    fit.params = params;
    fit.sigma.resize(r.size());
    fit.z.resize(r.size());
    for (std::size_t t = 0; t < r.size(); ++t) {
        fit.sigma[t] = std::sqrt(var[t]);
        fit.z[t] = r[t] / fit.sigma[t];
    }
    fit.log_likelihood = garch_log_likelihood(params, state, r);
    fit.sigma0_sq = state.sigma_sq;
    return fit;
}

namespace detail {

inline constexpr double kStationarityMargin = 1e-6;

[[nodiscard]] inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }
[[nodiscard]] inline double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

// omega = exp(a); persistence s = (1 - eps) * logistic(b); alpha = s*u, beta = s*(1-u), u = logistic(c)
[[nodiscard]] inline GarchParams from_unconstrained(const optim::Point<3>& x) noexcept {
    const double s = (1.0 - kStationarityMargin) * logistic(x[1]);
    const double u = logistic(x[2]);
    return {std::exp(x[0]), s * u, s * (1.0 - u)};
}

[[nodiscard]] inline optim::Point<3> to_unconstrained(const GarchParams& p) noexcept {
    const double s = p.alpha + p.beta;
    return {std::log(p.omega), logit(s / (1.0 - kStationarityMargin)), logit(p.alpha / s)};
}

} // namespace detail

struct GarchFitOptions {
    double tolerance = 1e-8;
    std::size_t max_evaluations = 20000;
};

/// Gaussian (quasi-)maximum-likelihood fit of the zero-mean GARCH(1,1) model.
///
/// The recursion is seeded with r^2 = sigma^2 = mean(r^2) over the window, so the
/// first conditional variance is omega + (alpha + beta) * mean(r^2). The search starts
/// from the variance-targeted point alpha = 0.05, beta = 0.90 and runs Nelder-Mead
/// over an unconstrained reparameterization that keeps every iterate feasible.
[[nodiscard]] inline GarchFit fit_garch11(const ReturnSeries& in_sample, const GarchFitOptions& options = {}) {
    auto r = in_sample.values();
    if (r.size() < kGarchMinObservations) {
        throw Error(ErrorCode::InsufficientData, "volatility",
                    "need at least " + std::to_string(kGarchMinObservations) + " returns, got " +
                        std::to_string(r.size()));
    }
    std::vector<std::string> warnings;
    if (r.size() < kGarchRecommendedObservations) {
        warnings.push_back("only " + std::to_string(r.size()) + " in-sample returns; estimates will be noisy");
    }
    const double v0 = zero_mean_variance(r);
    if (!(v0 > 0.0)) {
        throw Error(ErrorCode::AllZeroReturns, "volatility", "every in-sample return is zero");
    }
    const GarchState state{v0, v0};

    const GarchParams start{v0 * 0.05, 0.05, 0.90};
    auto objective = [&](const optim::Point<3>& x) {
        return -garch_log_likelihood(detail::from_unconstrained(x), state, r);
    };

    optim::NelderMeadOptions nm;
    nm.initial_step = 0.5;
    nm.x_tolerance = options.tolerance;
    nm.max_evaluations = options.max_evaluations;
    auto res = optim::nelder_mead<3>(objective, detail::to_unconstrained(start), nm);
    if (!std::isfinite(res.value)) {
        throw Error(ErrorCode::OptimizerFailure, "volatility", "likelihood is not finite anywhere on the search path");
    }
    if (!res.converged) {
        warnings.push_back("optimizer stopped after " + std::to_string(res.evaluations) +
                           " evaluations before reaching the tolerance");
    }

    const auto params = detail::from_unconstrained(res.x);
    if (!(params.alpha + params.beta < 1.0)) {
        throw Error(ErrorCode::NonStationaryFit, "volatility", "alpha + beta >= 1");
    }
    if (!params.valid()) {
        throw Error(ErrorCode::OptimizerFailure, "volatility", "optimizer left the feasible set");
    }

    GarchFit fit = filter_oos(params, state, in_sample);
    fit.n_in_sample = r.size();
    fit.sigma0_sq = v0;
    fit.warnings = std::move(warnings);
    return fit;
}

/// Draws a GARCH(1,1) path with Gaussian innovations. The recursion starts at
/// the unconditional variance and the first 500 draws are discarded.
[[nodiscard]] inline ReturnSeries simulate_garch(const GarchParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    if (n == 0) {
        throw Error(ErrorCode::InvalidParams, "volatility", "simulation length must be >= 1");
    }
    constexpr std::size_t burn_in = 500;
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double s2 = params.unconditional_variance();
    double r_prev = 0.0;
    bool first = true;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        if (!first) {
            s2 = params.omega + params.alpha * r_prev * r_prev + params.beta * s2;
        }
        first = false;
        r_prev = std::sqrt(s2) * normal(rng);
        if (t >= burn_in) {
            out.push_back(r_prev);
        }
    }
    return ReturnSeries::from_values(std::move(out));
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const GarchFit& fit) {
    nlohmann::ordered_json j;
    j["omega"] = fit.params.omega;
    j["alpha"] = fit.params.alpha;
    j["beta"] = fit.params.beta;
    j["log_likelihood"] = fit.log_likelihood;
    j["n_in_sample"] = fit.n_in_sample;
    j["sigma0_sq"] = fit.sigma0_sq;
    return j;
}

} // namespace qlink
