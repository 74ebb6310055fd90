#pragma once

#include "emdscale/error.hpp"
#include "emdscale/series_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace emdscale {

struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;

    [[nodiscard]] std::size_t count() const noexcept { return maxima.size() + minima.size(); }
};

/**
 * Strict local maxima and minima. A flat run bounded by a rise and a fall
 * counts once, at its midpoint index; runs touching either end are ignored.
 */
inline Extrema find_extrema(std::span<const double> values) {
    const std::size_t n = values.size();
    detail::require(n >= 3, Errc::TooShort, "extrema need at least three samples");
    Extrema out;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (values[i] == values[i - 1]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && values[j + 1] == values[i]) {
            ++j;
        }
        if (j + 1 >= n) {
            break;
        }
        const bool rose = values[i] > values[i - 1];
        const bool falls = values[j + 1] < values[j];
        if (rose && falls) {
            out.maxima.push_back((i + j) / 2);
        } else if (!rose && !falls) {
            out.minima.push_back((i + j) / 2);
        }
        i = j + 1;
    }
    return out;
}

/// Sign changes, with exact zeros skipped over (+, 0, - is one crossing).
inline std::size_t count_zero_crossings(std::span<const double> values) noexcept {
    std::size_t crossings = 0;
    int last_sign = 0;
    for (double v : values) {
        const int sign = (v > 0.0) - (v < 0.0);
        if (sign == 0) {
            continue;
        }
        if (last_sign != 0 && sign != last_sign) {
            ++crossings;
        }
        last_sign = sign;
    }
    return crossings;
}

/// IMF condition (a): extrema and zero-crossing counts differ by at most one.
inline bool satisfies_extrema_condition(std::span<const double> values) {
    const auto extrema = find_extrema(values).count();
    const auto crossings = count_zero_crossings(values);
    return (extrema > crossings ? extrema - crossings : crossings - extrema) <= 1;
}

/// Natural cubic spline through strictly increasing knots; linear beyond the end knots.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
        const std::size_t n = x_.size();
        detail::require(n == y_.size(), Errc::InvalidArgument, "spline knots and values differ in length");
        detail::require(n >= 2, Errc::InsufficientAnchors, "a spline needs at least two knots");
        for (std::size_t i = 1; i < n; ++i) {
            detail::require(x_[i] > x_[i - 1], Errc::InvalidArgument, "spline knots must increase");
        }
        if (n == 2) {
            return;
        }
        // Thomas algorithm on the interior second derivatives; m_[0] = m_[n-1] = 0.
        const std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1];
            const double h1 = x_[i + 1] - x_[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < k; ++i) {
            const double lower = x_[i + 1] - x_[i];
            const double w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t i = k - 1; i >= 1; --i) {
            m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
        }
    }

    [[nodiscard]] double operator()(double t) const {
        const std::size_t n = x_.size();
        if (t <= x_.front()) {
            return y_[0] + start_slope() * (t - x_[0]);
        }
        if (t >= x_.back()) {
            return y_[n - 1] + end_slope() * (t - x_[n - 1]);
        }
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        return segment(static_cast<std::size_t>(it - x_.begin()) - 1, t);
    }

    /// Values at t = 0, 1, ..., count - 1.
    [[nodiscard]] std::vector<double> sample(std::size_t count) const {
        std::vector<double> out(count);
        std::size_t seg = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i);
            if (t <= x_.front() || t >= x_.back()) {
                out[i] = (*this)(t);
                continue;
            }
            while (x_[seg + 1] < t) {
                ++seg;
            }
            out[i] = segment(seg, t);
        }
        return out;
    }

private:
    [[nodiscard]] double segment(std::size_t i, double t) const {
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - t) / h;
        const double b = (t - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    [[nodiscard]] double start_slope() const {
        const double h = x_[1] - x_[0];
        return (y_[1] - y_[0]) / h - h * (2.0 * m_[0] + m_[1]) / 6.0;
    }

    [[nodiscard]] double end_slope() const {
        const std::size_t n = x_.size();
        const double h = x_[n - 1] - x_[n - 2];
        return (y_[n - 1] - y_[n - 2]) / h + h * (m_[n - 2] + 2.0 * m_[n - 1]) / 6.0;
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

enum class BoundaryPolicy {
    /// Reflect the two extrema nearest each end across that end sample.
    MirrorExtrema,
    /// Anchors used as given; the spline extends linearly past them.
    None,
};

/// Spline envelope through `values` at the anchor indices, sampled over the full index range.
inline std::vector<double> envelope(std::span<const double> values, std::span<const std::size_t> anchors,
                                    BoundaryPolicy boundary = BoundaryPolicy::MirrorExtrema) {
    constexpr std::size_t mirrored = 2;
    const std::size_t n = values.size();
    for (std::size_t a : anchors) {
        detail::require(a < n, Errc::IndexOutOfRange, "envelope anchor outside the series");
    }
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(anchors.size() + 2 * mirrored);
    y.reserve(anchors.size() + 2 * mirrored);
    const std::size_t reflect = boundary == BoundaryPolicy::MirrorExtrema
                                    ? std::min(mirrored, anchors.size())
                                    : 0;
    for (std::size_t k = reflect; k-- > 0;) {
        if (anchors[k] != 0) {
            x.push_back(-static_cast<double>(anchors[k]));
            y.push_back(values[anchors[k]]);
        }
    }
    for (std::size_t a : anchors) {
        x.push_back(static_cast<double>(a));
        y.push_back(values[a]);
    }
    const double last = static_cast<double>(n - 1);
    for (std::size_t k = 0; k < reflect; ++k) {
        const std::size_t a = anchors[anchors.size() - 1 - k];
        if (a != n - 1) {
            x.push_back(2.0 * last - static_cast<double>(a));
            y.push_back(values[a]);
        }
    }
    if (x.size() < 2) {
        detail::fail(Errc::InsufficientAnchors, "fewer than two envelope anchors after boundary extension");
    }
    return NaturalCubicSpline(std::move(x), std::move(y)).sample(n);
}

struct EmdConfig {
    double sd_threshold = 0.2;  ///< Stop sifting once SD falls below this.
    std::size_t max_sift_iters = 100;
    std::optional<std::size_t> max_imfs;  ///< Unbounded when empty.
    BoundaryPolicy boundary = BoundaryPolicy::MirrorExtrema;
    /// Sifting also continues until the mean envelope's RMS is at most this
    /// fraction of the candidate's RMS over the interior 90%. Empty disables the check.
    std::optional<double> envelope_tolerance = 0.1;
    /// Decomposition stops once max|remainder| or max|next IMF| is at most this x max|input|.
    /// Below that the sift only extracts rounding noise (e.g. after a pure tone) and never ends.
    double residue_tolerance = 1e-10;

    void validate() const {
        detail::require(sd_threshold > 0.0 && std::isfinite(sd_threshold), Errc::InvalidArgument,
                        "sd_threshold must be positive");
        detail::require(max_sift_iters >= 1, Errc::InvalidArgument, "max_sift_iters must be at least 1");
        detail::require(!envelope_tolerance || *envelope_tolerance > 0.0, Errc::InvalidArgument,
                        "envelope_tolerance must be positive");
        detail::require(residue_tolerance >= 0.0 && residue_tolerance < 1.0, Errc::InvalidArgument,
                        "residue_tolerance must lie in [0, 1)");
    }
};

/// Sifting needs at least one maximum, one minimum and three extrema in total.
inline bool can_sift(const Extrema& extrema) noexcept {
    return !extrema.maxima.empty() && !extrema.minima.empty() && extrema.count() >= 3;
}

/// Mean of the upper and lower spline envelopes.
inline std::vector<double> mean_envelope(std::span<const double> values, const Extrema& extrema,
                                         BoundaryPolicy boundary = BoundaryPolicy::MirrorExtrema) {
    auto upper = envelope(values, extrema.maxima, boundary);
    const auto lower = envelope(values, extrema.minima, boundary);
    for (std::size_t i = 0; i < upper.size(); ++i) {
        upper[i] = 0.5 * (upper[i] + lower[i]);
    }
    return upper;
}

inline std::vector<double> mean_envelope(std::span<const double> values,
                                         BoundaryPolicy boundary = BoundaryPolicy::MirrorExtrema) {
    return mean_envelope(values, find_extrema(values), boundary);
}

struct SiftResult {
    std::vector<double> imf;
    std::size_t iterations = 0;
};

namespace detail {

/// RMS(mean) <= tolerance * RMS(h) over [n/20, n - n/20).
inline bool envelope_small(std::span<const double> h, std::span<const double> mean, double tolerance) {
    const std::size_t margin = h.size() / 20;
    double mean_energy = 0.0;
    double energy = 0.0;
    for (std::size_t i = margin; i + margin < h.size(); ++i) {
        mean_energy += mean[i] * mean[i];
        energy += h[i] * h[i];
    }
    return mean_energy <= tolerance * tolerance * energy;
}

}  // namespace detail

/**
 * Extracts one IMF: h <- h - mean envelope, repeated until
 * SD = sum (h_prev - h)^2 / sum h_prev^2 drops below the threshold, the
 * extrema/zero-crossing counts differ by at most one and the mean envelope is
 * small (see EmdConfig::envelope_tolerance), or the iteration cap is hit.
 * Stops early if h loses all its maxima or all its minima.
 */
inline SiftResult sift(std::span<const double> values, const EmdConfig& config = {}) {
    config.validate();
    if (values.size() < 3 || !can_sift(find_extrema(values))) {
        detail::fail(Errc::NoOscillation, "too few extrema to sift");
    }
    SiftResult out{{values.begin(), values.end()}, 0};
    auto& h = out.imf;
    double sd = std::numeric_limits<double>::infinity();
    while (true) {
        // A candidate that drops to one maximum and one minimum still has mirrored
        // envelopes; sifting on keeps its mean envelope within tolerance.
        const auto extrema = find_extrema(h);
        if (extrema.maxima.empty() || extrema.minima.empty()) {
            break;
        }
        const auto mean = mean_envelope(h, extrema, config.boundary);
        if (out.iterations > 0 && sd < config.sd_threshold) {
            const auto crossings = count_zero_crossings(h);
            const auto count = extrema.count();
            const bool counts_ok = (count > crossings ? count - crossings : crossings - count) <= 1;
            if (counts_ok && (!config.envelope_tolerance ||
                              detail::envelope_small(h, mean, *config.envelope_tolerance))) {
                break;
            }
        }
        if (out.iterations >= config.max_sift_iters) {
            break;
        }
        double change = 0.0;
        double energy = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            energy += h[i] * h[i];
            change += mean[i] * mean[i];
            h[i] -= mean[i];
        }
        ++out.iterations;
        if (energy == 0.0) {
            break;
        }
        sd = change / energy;
    }
    return out;
}

/// IMFs in extraction order (fastest first) plus the residue trend.
struct Decomposition {
    std::vector<std::vector<double>> imfs;
    std::vector<double> residue;
    std::vector<std::size_t> sift_counts;
    std::string source_label;

    [[nodiscard]] std::size_t imf_count() const noexcept { return imfs.size(); }
    [[nodiscard]] std::size_t length() const noexcept { return residue.size(); }
};

inline Decomposition decompose(std::span<const double> values, const EmdConfig& config = {},
                               std::string label = {}) {
    config.validate();
    detail::require(values.size() >= 16, Errc::TooShort, "decomposition needs at least 16 samples");
    Decomposition out;
    out.source_label = std::move(label);
    std::vector<double> remainder(values.begin(), values.end());
    auto peak = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) {
            m = std::max(m, std::abs(x));
        }
        return m;
    };
    const double floor = config.residue_tolerance * peak(values);
    while (!config.max_imfs || out.imfs.size() < *config.max_imfs) {
        if (peak(remainder) <= floor || !can_sift(find_extrema(remainder))) {
            break;
        }
        auto [imf, iterations] = sift(remainder, config);
        if (peak(imf) <= floor) {
            break;
        }
        for (std::size_t i = 0; i < remainder.size(); ++i) {
            remainder[i] -= imf[i];
        }
        out.imfs.push_back(std::move(imf));
        out.sift_counts.push_back(iterations);
    }
    out.residue = std::move(remainder);
    return out;
}

inline Decomposition decompose(const TimeSeries& series, const EmdConfig& config = {}) {
    return decompose(series.values(), config, series.label());
}

/// Pointwise sum of the selected IMFs (zero-based indices), plus the residue if asked.
inline std::vector<double> reconstruct(const Decomposition& decomp, std::span<const std::size_t> imf_indices,
                                       bool include_residue) {
    std::vector<double> out(decomp.length(), 0.0);
    for (std::size_t k : imf_indices) {
        if (k >= decomp.imf_count()) {
            detail::fail(Errc::IndexOutOfRange, "IMF index " + std::to_string(k) + " of " +
                                                    std::to_string(decomp.imf_count()));
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += decomp.imfs[k][i];
        }
    }
    if (include_residue) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += decomp.residue[i];
        }
    }
    return out;
}

/// Zero-based index range [first, last).
inline std::vector<std::size_t> imf_range(std::size_t first, std::size_t last) {
    std::vector<std::size_t> out;
    for (std::size_t k = first; k < last; ++k) {
        out.push_back(k);
    }
    return out;
}

/// CSV with columns `t,imf1..imfK,residue`.
inline void write_decomposition_csv(std::ostream& out, const Decomposition& decomp) {
    out << 't';
    for (std::size_t k = 0; k < decomp.imf_count(); ++k) {
        out << ",imf" << k + 1;
    }
    out << ",residue\n";
    for (std::size_t i = 0; i < decomp.length(); ++i) {
        out << i;
        for (const auto& imf : decomp.imfs) {
            out << ',' << format_double(imf[i]);
        }
        out << ',' << format_double(decomp.residue[i]) << '\n';
    }
}

}  // namespace emdscale
