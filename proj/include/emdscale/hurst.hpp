#pragma once

#include "emdscale/error.hpp"
#include "emdscale/series_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace emdscale {

struct RescaledRangePoint {
    std::size_t n = 0;  ///< subperiod length
    double rs = 0.0;    ///< mean R/S over the subperiods

    friend bool operator==(const RescaledRangePoint&, const RescaledRangePoint&) = default;
};

/// Fit of ln(R/S_n) = ln(c) + H ln(n).
struct HurstEstimate {
    double h = 0.0;
    double std_error = 0.0;  ///< OLS standard error of the slope
    double intercept = 0.0;  ///< ln(c)
    std::vector<RescaledRangePoint> points;

    /// Two-sigma band, as used for error bars.
    [[nodiscard]] double lower_2sigma() const noexcept { return h - 2.0 * std_error; }
    [[nodiscard]] double upper_2sigma() const noexcept { return h + 2.0 * std_error; }

    friend bool operator==(const HurstEstimate&, const HurstEstimate&) = default;
};

struct HurstOptions {
    /// Subtract the Anis-Lloyd/Peters expected R/S of white noise before fitting
    /// (and add 0.5 back). Off by default: raw R/S is the reference estimator.
    bool anis_lloyd = false;
};

/**
 * Mean rescaled range over the P = floor(N / n) disjoint subperiods of length
 * n covering the first P*n samples. Each subperiod uses its own mean and
 * population standard deviation (divisor n); the range is taken over the
 * cumulative departures from that mean. Flat subperiods (S = 0) are skipped.
 */
inline double rescaled_range(std::span<const double> values, std::size_t n) {
    detail::require(n >= 8, Errc::InvalidArgument, "subperiod length must be at least 8");
    const std::size_t periods = values.size() / n;
    detail::require(periods >= 1, Errc::TooShort, "series shorter than one subperiod");
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t m = 0; m < periods; ++m) {
        const auto window = values.subspan(m * n, n);
        double mean = 0.0;
        for (double v : window) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        double cumulative = 0.0;
        double lo = 0.0;
        double hi = 0.0;
        bool first = true;
        for (double v : window) {
            const double dev = v - mean;
            ss += dev * dev;
            cumulative += dev;
            if (first) {
                lo = hi = cumulative;
                first = false;
            } else {
                lo = std::min(lo, cumulative);
                hi = std::max(hi, cumulative);
            }
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd == 0.0 || sd <= 1e-12 * std::abs(mean)) {
            continue;
        }
        total += (hi - lo) / sd;
        ++used;
    }
    if (used == 0) {
        detail::fail(Errc::DegenerateSeries, "every subperiod has zero standard deviation");
    }
    return total / static_cast<double>(used);
}

/// About 12 subperiod lengths, log-spaced over [16, N/4], rounded and deduplicated.
inline std::vector<std::size_t> auto_lag_grid(std::size_t length) {
    detail::require(length >= 256, Errc::TooShort, "automatic lag grid needs at least 256 samples");
    constexpr std::size_t count = 12;
    const double lo = std::log(16.0);
    const double hi = std::log(static_cast<double>(length / 4));
    std::vector<std::size_t> grid;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        const auto n = static_cast<std::size_t>(std::llround(std::exp(x)));
        if (grid.empty() || grid.back() != n) {
            grid.push_back(n);
        }
    }
    return grid;
}

/// Expected R/S of white noise for subperiod length n (Anis-Lloyd with Peters' factor).
inline double expected_rescaled_range(std::size_t n) {
    const double nd = static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        sum += std::sqrt((nd - static_cast<double>(i)) / static_cast<double>(i));
    }
    const double gamma_ratio =
        n <= 340 ? std::exp(std::lgamma((nd - 1.0) / 2.0) - std::lgamma(nd / 2.0)) / std::sqrt(std::numbers::pi)
                 : 1.0 / std::sqrt(nd * std::numbers::pi / 2.0);
    return (nd - 0.5) / nd * gamma_ratio * sum;
}

/// Straight-line least squares; returns {slope, intercept, slope standard error}.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t m = x.size();
    detail::require(m == y.size() && m >= 3, Errc::InvalidArgument, "line fit needs at least 3 points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    detail::require(sxx > 0.0, Errc::InvalidArgument, "line fit needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ssr += r * r;
    }
    fit.slope_std_error = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
    return fit;
}

/**
 * Hurst exponent as the OLS slope of ln(R/S_n) on ln(n). With no grid the
 * automatic one is used (series of at least 256 samples); an explicit grid
 * must satisfy 8 <= n <= N/2. Grid points whose subperiods are all flat are
 * dropped; at least four points must remain.
 */
inline HurstEstimate hurst_exponent(std::span<const double> values,
                                    std::optional<std::vector<std::size_t>> lag_grid = std::nullopt,
                                    HurstOptions options = {}) {
    std::vector<std::size_t> grid;
    if (lag_grid) {
        grid = *lag_grid;
        detail::require(values.size() >= 16, Errc::TooShort, "Hurst estimation needs at least 16 samples");
        for (std::size_t n : grid) {
            detail::require(n >= 8 && n <= values.size() / 2, Errc::InvalidArgument,
                            "lag grid values must satisfy 8 <= n <= N/2");
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    } else {
        grid = auto_lag_grid(values.size());
    }

    HurstEstimate out;
    bool degenerate = false;
    for (std::size_t n : grid) {
        try {
            out.points.push_back({n, rescaled_range(values, n)});
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateSeries) {
                throw;
            }
            degenerate = true;
        }
    }
    if (out.points.size() < 4) {
        detail::fail(degenerate ? Errc::DegenerateSeries : Errc::InvalidArgument,
                     "fewer than four usable lag-grid points");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : out.points) {
        x.push_back(std::log(static_cast<double>(p.n)));
        y.push_back(std::log(p.rs) - (options.anis_lloyd ? std::log(expected_rescaled_range(p.n)) : 0.0));
    }
    const auto fit = fit_line(x, y);
    out.h = fit.slope + (options.anis_lloyd ? 0.5 : 0.0);
    out.intercept = fit.intercept;
    out.std_error = fit.slope_std_error;
    return out;
}

/// CSV with columns `ln_n,ln_rs`.
inline void write_rs_points_csv(std::ostream& out, std::span<const RescaledRangePoint> points) {
    out << "ln_n,ln_rs\n";
    for (const auto& p : points) {
        out << format_double(std::log(static_cast<double>(p.n))) << ',' << format_double(std::log(p.rs)) << '\n';
    }
}

}  // namespace emdscale
