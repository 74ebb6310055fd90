#pragma once

#include "emdscale/emd.hpp"
#include "emdscale/error.hpp"
#include "emdscale/fft.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace emdscale {

/// Half-open index window that drops 5% of samples at each end.
struct InteriorWindow {
    std::size_t begin = 0;
    std::size_t end = 0;
};

inline InteriorWindow interior_window(std::size_t n) noexcept {
    const std::size_t margin = n / 20;
    return {margin, n - margin};
}

/**
 * values + i * Hilbert(values) by the DFT route: zero the negative
 * frequencies, double the positive ones, keep DC (and Nyquist for even n).
 */
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> values) {
    const std::size_t n = values.size();
    detail::require(n >= 8, Errc::TooShort, "analytic signal needs at least 8 samples");
    auto spectrum = fft::forward(values);
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k < n; ++k) {
        if (k < half || (k == half && n % 2 == 1)) {
            spectrum[k] *= 2.0;
        } else if (k > half) {
            spectrum[k] = 0.0;
        }
    }
    auto out = fft::transform(spectrum, fft::Direction::Backward);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : out) {
        z *= scale;
    }
    return out;
}

struct FrequencyTrack {
    std::vector<double> phase;      ///< radians, unwrapped
    std::vector<double> omega;      ///< cycles per day
    std::vector<double> amplitude;  ///< |analytic signal|
    /// Samples where the magnitude is below 1e-12; frequency is undefined there and they
    /// are left out of every average.
    std::vector<std::size_t> zero_magnitude;
};

/// Phase derivative by central differences (one-sided at the ends), in cycles per day.
inline FrequencyTrack instantaneous_frequency(std::span<const std::complex<double>> analytic, double dt = 1.0) {
    constexpr double magnitude_floor = 1e-12;
    const std::size_t n = analytic.size();
    detail::require(n >= 2, Errc::TooShort, "frequency needs at least two samples");
    detail::require(dt > 0.0, Errc::InvalidArgument, "dt must be positive");
    FrequencyTrack out;
    out.phase.resize(n);
    out.omega.resize(n);
    out.amplitude.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.amplitude[i] = std::abs(analytic[i]);
        if (out.amplitude[i] < magnitude_floor) {
            out.zero_magnitude.push_back(i);
        }
        if (i == 0) {
            out.phase[0] = std::arg(analytic[0]);
            continue;
        }
        double step = std::arg(analytic[i]) - std::arg(analytic[i - 1]);
        step -= 2.0 * std::numbers::pi * std::round(step / (2.0 * std::numbers::pi));
        out.phase[i] = out.phase[i - 1] + step;
    }
    const double to_cycles = 1.0 / (2.0 * std::numbers::pi * dt);
    for (std::size_t i = 0; i < n; ++i) {
        double slope = 0.0;
        if (i == 0) {
            slope = out.phase[1] - out.phase[0];
        } else if (i + 1 == n) {
            slope = out.phase[n - 1] - out.phase[n - 2];
        } else {
            slope = 0.5 * (out.phase[i + 1] - out.phase[i - 1]);
        }
        out.omega[i] = slope * to_cycles;
    }
    return out;
}

/// Characteristic time scales of one oscillatory component, in days.
struct InstantaneousAttributes {
    std::vector<double> phase;
    std::vector<double> omega;
    double mean_period_days = 0.0;           ///< 1 / energy-weighted mean frequency
    double zero_crossing_period_days = 0.0;  ///< 2 * length * dt / #zero-crossings
};

/**
 * tau = 1 / (amplitude^2-weighted mean instantaneous frequency over the
 * interior 90% of samples). Also fills the zero-crossing estimate used as a
 * cross-check.
 */
inline InstantaneousAttributes instantaneous_attributes(std::span<const double> imf, double dt = 1.0) {
    const std::size_t crossings = count_zero_crossings(imf);
    if (crossings < 2) {
        detail::fail(Errc::NoOscillation, "fewer than two zero crossings");
    }
    const auto track = instantaneous_frequency(analytic_signal(imf), dt);
    const auto window = interior_window(imf.size());
    std::size_t skip = 0;
    double weighted = 0.0;
    double weight = 0.0;
    for (std::size_t i = window.begin; i < window.end; ++i) {
        while (skip < track.zero_magnitude.size() && track.zero_magnitude[skip] < i) {
            ++skip;
        }
        if (skip < track.zero_magnitude.size() && track.zero_magnitude[skip] == i) {
            continue;
        }
        const double w = track.amplitude[i] * track.amplitude[i];
        weighted += w * track.omega[i];
        weight += w;
    }
    if (!(weight > 0.0) || !(weighted > 0.0)) {
        detail::fail(Errc::NoOscillation, "no positive mean frequency on the interior window");
    }
    InstantaneousAttributes out;
    out.mean_period_days = weight / weighted;
    out.zero_crossing_period_days =
        2.0 * static_cast<double>(imf.size()) * dt / static_cast<double>(crossings);
    out.phase = track.phase;
    out.omega = track.omega;
    return out;
}

inline double mean_period(std::span<const double> imf, double dt = 1.0) {
    return instantaneous_attributes(imf, dt).mean_period_days;
}

}  // namespace emdscale
