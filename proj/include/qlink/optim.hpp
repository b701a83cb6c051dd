#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace qlink::optim {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct MinimizeResult {
    Point<N> x{};
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

struct NelderMeadOptions {
    double initial_step = 0.1;
    /// Stop once every vertex lies within this distance (max-norm) of the best.
    double x_tolerance = 1e-8;
    std::size_t max_evaluations = 20000;
    /// Restart from the best vertex with a fresh simplex until a restart no
    /// longer moves the optimum by more than x_tolerance.
    std::size_t max_restarts = 8;
};

/// Nelder-Mead downhill simplex with standard coefficients (1, 2, 0.5, 0.5).
/// Non-finite objective values are treated as +inf. The best value is
/// non-increasing, so the result is never worse than f(x0).
template <std::size_t N, class F>
[[nodiscard]] MinimizeResult<N> nelder_mead(F&& f, Point<N> x0, const NelderMeadOptions& opt = {}) {
    auto eval = [&](const Point<N>& x, std::size_t& count) {
        ++count;
        double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    MinimizeResult<N> best;
    best.x = x0;
    best.value = eval(x0, best.evaluations);

    for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
        std::array<Point<N>, N + 1> s;
        std::array<double, N + 1> fv;
        s[0] = best.x;
        fv[0] = best.value;
        for (std::size_t i = 0; i < N; ++i) {
            s[i + 1] = best.x;
            s[i + 1][i] += opt.initial_step;
            fv[i + 1] = eval(s[i + 1], best.evaluations);
        }

        bool converged = false;
        while (best.evaluations < opt.max_evaluations) {
            std::array<std::size_t, N + 1> order;
            for (std::size_t i = 0; i <= N; ++i) {
                order[i] = i;
            }
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const auto lo = order[0];
            const auto hi = order[N];
            const auto second = order[N - 1];

            double spread = 0.0;
            for (std::size_t i = 0; i <= N; ++i) {
                for (std::size_t k = 0; k < N; ++k) {
                    spread = std::max(spread, std::abs(s[i][k] - s[lo][k]));
                }
            }
            if (spread < opt.x_tolerance) {
                converged = true;
                break;
            }

            Point<N> centroid{};
            for (std::size_t i = 0; i <= N; ++i) {
                if (i == hi) {
                    continue;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    centroid[k] += s[i][k] / static_cast<double>(N);
                }
            }
            auto along = [&](double t) {
                Point<N> p;
                for (std::size_t k = 0; k < N; ++k) {
                    p[k] = centroid[k] + t * (s[hi][k] - centroid[k]);
                }
                return p;
            };

            auto xr = along(-1.0);
            double fr = eval(xr, best.evaluations);
            if (fr < fv[lo]) {
                auto xe = along(-2.0);
                double fe = eval(xe, best.evaluations);
                if (fe < fr) {
                    s[hi] = xe;
                    fv[hi] = fe;
                } else {
                    s[hi] = xr;
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[second]) {
                s[hi] = xr;
                fv[hi] = fr;
                continue;
            }
            const bool outside = fr < fv[hi];
            auto xc = along(outside ? -0.5 : 0.5);
            double fc = eval(xc, best.evaluations);
            if (fc < (outside ? fr : fv[hi])) {
                s[hi] = xc;
                fv[hi] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= N; ++i) {
                if (i == lo) {
                    continue;
                }
                for (std::size_t k = 0; k < N; ++k) {
                    s[i][k] = s[lo][k] + 0.5 * (s[i][k] - s[lo][k]);
                }
                fv[i] = eval(s[i], best.evaluations);
            }
        }

        const auto lo = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        double moved = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            moved = std::max(moved, std::abs(s[lo][k] - best.x[k]));
        }
        if (fv[lo] <= best.value) {
            best.x = s[lo];
            best.value = fv[lo];
        }
        best.converged = converged;
        if (!converged || moved < opt.x_tolerance) {
            break;
        }
    }
    return best;
}

} // namespace qlink::optim
