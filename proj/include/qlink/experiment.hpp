#pragma once

#include "qlink/error.hpp"
#include "qlink/forecast.hpp"
#include "qlink/ingest.hpp"
#include "qlink/metrics.hpp"
#include "qlink/rng.hpp"
#include "qlink/signgen.hpp"
#include "qlink/volatility.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace qlink {

/// Window on which the scaling factors are estimated. InSample uses a separate
/// synthetic sign path over the in-sample dates; Oracle fits on the evaluation
/// window itself, which makes Type1 exactly least-squares optimal there.
enum class LambdaWindow { InSample, Oracle };

[[nodiscard]] constexpr std::string_view to_string(LambdaWindow w) noexcept {
    return w == LambdaWindow::Oracle ? "oracle" : "in_sample";
}

[[nodiscard]] inline std::optional<LambdaWindow> parse_lambda_window(std::string_view s) {
    if (s == "in_sample" || s == "in-sample" || s == "insample") return LambdaWindow::InSample;
    if (s == "oracle") return LambdaWindow::Oracle;
    return std::nullopt;
}

struct ExperimentConfig {
    std::size_t levels = 20;
    std::size_t reps = 100;
    double split_fraction = 0.8;
    std::uint64_t seed = 42;
    std::vector<ForecastKind> kinds{ForecastKind::Type1, ForecastKind::Type2, ForecastKind::Type3};
    LambdaWindow lambda_window = LambdaWindow::InSample;
    /// Subtract the in-sample mean return before fitting (default: zero-mean model).
    bool demean = false;
    double garch_tolerance = 1e-8;

    void validate() const {
        auto bad = [](const std::string& m) { return Error(ErrorCode::InvalidConfig, "experiment", m); };
        if (levels < 2) throw bad("levels must be >= 2");
        if (reps < 1) throw bad("reps must be >= 1");
        if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw bad("split_fraction must lie in (0, 1)");
        if (kinds.empty()) throw bad("at least one forecast kind is required");
        for (std::size_t i = 1; i < kinds.size(); ++i) {
            if (!(kinds[i - 1] < kinds[i])) throw bad("kinds must be distinct and ascending");
        }
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses "1,3" / "type1,type3" into a sorted, de-duplicated kind list.
[[nodiscard]] inline std::vector<ForecastKind> parse_kind_list(std::string_view s) {
    std::vector<ForecastKind> kinds;
    for (auto field : detail::split_fields(s, ',')) {
        if (field.empty()) continue;
        auto k = parse_forecast_kind(field);
        if (!k) {
            throw Error(ErrorCode::InvalidConfig, "experiment", "unknown forecast type '" + std::string(field) + "'");
        }
        kinds.push_back(*k);
    }
    std::sort(kinds.begin(), kinds.end());
    kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
    return kinds;
}

/// Applies a flat key=value document on top of `base`. Blank lines and lines
/// starting with '#' are skipped; unknown keys are errors.
[[nodiscard]] inline ExperimentConfig parse_experiment_config(std::string_view text, ExperimentConfig base = {}) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = detail::trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        auto bad = [&](const std::string& m) {
            return Error(ErrorCode::InvalidConfig, "experiment", "line " + std::to_string(line_no) + ": " + m);
        };
        if (eq == std::string_view::npos) throw bad("expected key=value");
        std::string key(detail::trim(line.substr(0, eq)));
        std::replace(key.begin(), key.end(), '-', '_');
        auto value = detail::trim(line.substr(eq + 1));
        auto as_uint = [&]() {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || p != value.data() + value.size()) throw bad("expected an integer for " + key);
            return v;
        };
        if (key == "levels") {
            base.levels = as_uint();
        } else if (key == "reps") {
            base.reps = as_uint();
        } else if (key == "seed") {
            base.seed = as_uint();
        } else if (key == "split" || key == "split_fraction") {
            auto v = detail::parse_double(value);
            if (!v) throw bad("expected a number for " + key);
            base.split_fraction = *v;
        } else if (key == "types" || key == "kinds") {
            base.kinds = parse_kind_list(value);
        } else if (key == "lambda_window") {
            auto w = parse_lambda_window(value);
            if (!w) throw bad("lambda_window must be in_sample or oracle");
            base.lambda_window = *w;
        } else if (key == "demean") {
            if (value == "true" || value == "1") base.demean = true;
            else if (value == "false" || value == "0") base.demean = false;
            else throw bad("demean must be true or false");
        } else if (key == "tolerance" || key == "garch_tolerance") {
            auto v = detail::parse_double(value);
            if (!v || !(*v > 0.0)) throw bad("expected a positive number for " + key);
            base.garch_tolerance = *v;
        } else {
            throw bad("unknown key '" + key + "'");
        }
    }
    base.validate();
    return base;
}

struct Summary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;

    friend bool operator==(const Summary&, const Summary&) = default;
};

struct GroupAggregate {
    std::size_t level = 0;
    double target_p = 0.0;
    ForecastKind kind = ForecastKind::Type1;
    std::size_t count = 0;
    Summary da;
    Summary r2_oos;

    friend bool operator==(const GroupAggregate&, const GroupAggregate&) = default;
};

namespace detail {

// Linear interpolation between order statistics of sorted data.
[[nodiscard]] inline double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Values are sorted before summing so the result does not depend on input order.
[[nodiscard]] inline Summary summarize(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    return {sum / static_cast<double>(v.size()), v.front(), v.back(), sorted_quantile(v, 0.05),
            sorted_quantile(v, 0.95)};
}

} // namespace detail

/// Per-(level, kind) mean, min, max and central 90% band of DA and R^2,
/// ordered by level then kind.
[[nodiscard]] inline std::vector<GroupAggregate> aggregate(const std::vector<MetricPoint>& points) {
    if (points.empty()) {
        throw Error(ErrorCode::EmptyInput, "experiment", "no points to aggregate");
    }
    struct Bucket {
        double target_p = 0.0;
        std::vector<double> da;
        std::vector<double> r2;
    };
    std::map<std::pair<std::size_t, ForecastKind>, Bucket> groups;
    for (const auto& p : points) {
        auto& b = groups[{p.level, p.kind}];
        b.target_p = p.target_p;
        b.da.push_back(p.da);
        b.r2.push_back(p.r2_oos);
    }
    std::vector<GroupAggregate> out;
    out.reserve(groups.size());
    for (auto& [key, b] : groups) {
        out.push_back({key.first, b.target_p, key.second, b.da.size(), detail::summarize(std::move(b.da)),
                       detail::summarize(std::move(b.r2))});
    }
    return out;
}

/// Returns and volatility for both windows: everything the grid needs.
struct VolatilityInputs {
    ReturnSeries in_sample;
    std::vector<double> in_sigma;
    ReturnSeries out_sample;
    std::vector<double> out_sigma;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<MetricPoint> points;
    KappaEstimate kappa;
    std::vector<GroupAggregate> aggregates;
    GarchParams garch;
    std::size_t n_in_sample = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline void evaluate_cell(const VolatilityInputs& in, const ExperimentConfig& cfg, double p, std::size_t level,
                          std::size_t rep, std::span<const Sign> in_signs, std::span<const Sign> out_signs,
                          std::span<MetricPoint> out) {
    Rng out_rng = make_rng(cfg.seed, {level, rep, 1});
    const SignPath oos_path = gen_sign_path(out_signs, p, out_rng);
    std::optional<SignPath> is_path;
    if (cfg.lambda_window == LambdaWindow::InSample) {
        Rng in_rng = make_rng(cfg.seed, {level, rep, 0});
        is_path = gen_sign_path(in_signs, p, in_rng);
    }
    auto actual = in.out_sample.values();
    for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
        const auto kind = cfg.kinds[k];
        const double lambda = is_path ? estimate_lambda(kind, in.in_sample.values(), *is_path, in.in_sigma)
                                      : estimate_lambda(kind, actual, oos_path, in.out_sigma);
        const auto f = build_forecast(kind, oos_path, in.out_sigma, lambda);
        out[k] = MetricPoint{p, level, rep, kind, directional_accuracy(actual, f.mu), r2_oos(actual, f.mu)};
    }
}

} // namespace detail

/// Runs levels x reps cells over fixed volatility inputs. Cell (i, j) draws
/// from generators keyed on (seed, i, j) only, so results are identical for any
/// worker count and independent of which other cells exist.
[[nodiscard]] inline std::vector<MetricPoint> run_grid(const VolatilityInputs& in, const ExperimentConfig& cfg,
                                                       unsigned jobs = 1) {
    cfg.validate();
    if (in.in_sigma.size() != in.in_sample.size() || in.out_sigma.size() != in.out_sample.size()) {
        throw Error(ErrorCode::MisalignedInputs, "experiment", "volatility paths do not match their windows");
    }
    const auto grid = accuracy_grid(cfg.levels);
    const auto in_signs = realized_sign(in.in_sample.values());
    const auto out_signs = realized_sign(in.out_sample.values());
    const std::size_t nk = cfg.kinds.size();
    const std::size_t cells = cfg.levels * cfg.reps;
    std::vector<MetricPoint> points(cells * nk);
    std::vector<std::exception_ptr> errors(cells);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    auto worker = [&] {
        for (std::size_t c = next++; c < cells && !abort; c = next++) {
            const std::size_t i = c / cfg.reps;
            const std::size_t j = c % cfg.reps;
            try {
                detail::evaluate_cell(in, cfg, grid[i], i, j, in_signs, out_signs,
                                      std::span<MetricPoint>(points).subspan(c * nk, nk));
            } catch (...) {
                errors[c] = std::current_exception();
                abort = true;
            }
        }
    };
    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(cells)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (!errors[c]) continue;
        const auto where = "cell (level " + std::to_string(c / cfg.reps) + ", rep " + std::to_string(c % cfg.reps) + ")";
        try {
            std::rethrow_exception(errors[c]);
        } catch (const Error& e) {
            throw Error(e.code(), "experiment", where + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorCode::InvalidConfig, "experiment", where + ": " + e.what());
        }
    }
    return points;
}

/// Split, GARCH fit on the in-sample window, fixed-parameter filtering of the
/// out-of-sample window.
[[nodiscard]] inline std::pair<VolatilityInputs, GarchFit> prepare_volatility(const ReturnSeries& returns,
                                                                              const ExperimentConfig& cfg) {
    auto windows = split(returns, cfg.split_fraction);
    if (cfg.demean) windows = demean(windows);
    GarchFitOptions opt;
    opt.tolerance = cfg.garch_tolerance;
    GarchFit fit = fit_garch11(windows.in_sample, opt);
    GarchFit oos = filter_oos(fit.params, fit.last_state(windows.in_sample.values()), windows.out_sample);
    VolatilityInputs in{std::move(windows.in_sample), fit.sigma, std::move(windows.out_sample), std::move(oos.sigma)};
    return {std::move(in), std::move(fit)};
}

[[nodiscard]] inline ExperimentResult run_experiment(const ReturnSeries& returns, const ExperimentConfig& cfg,
                                                     unsigned jobs = 1) {
    cfg.validate();
    auto [vol, fit] = prepare_volatility(returns, cfg);
    ExperimentResult result;
    result.config = cfg;
    result.kappa = kappa_hat(vol.out_sample.values(), vol.out_sigma);
    result.points = run_grid(vol, cfg, jobs);
    result.aggregates = aggregate(result.points);
    result.garch = fit.params;
    result.n_in_sample = fit.n_in_sample;
    result.warnings = fit.warnings;
    return result;
}

} // namespace qlink
