#pragma once

// Seeded generators of synthetic series with known ground truth.
//
// Random stream "emdscale-rng-v1", fixed so fixtures can be regenerated
// from a seed in any language:
//   * engine: 64-bit Mersenne Twister (mt19937_64) seeded with the 64-bit seed;
//   * uniform in [0, 1): (next() >> 11) * 2^-53;
//   * normal: Box-Muller on two uniforms u1, u2 drawn in that order,
//     r = sqrt(-2 ln(1 - u1)); the first call returns r cos(2 pi u2), the
//     second returns the cached r sin(2 pi u2).

#include "emdscale/error.hpp"
#include "emdscale/fft.hpp"
#include "emdscale/series_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace emdscale {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (cached_) {
            const double z = *cached_;
            cached_.reset();
            return z;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(angle);
        return r * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> cached_;
};

namespace synth {

struct WhiteNoise {};
struct RandomWalk {};
struct Fbm {
    double h = 0.5;
};
struct BrokenTrend {
    double break_frac = 0.5;
    double level_shift = 0.0;
    double slope_shift = 0.0;
    double noise_sd = 1.0;
    double base_slope = 0.0;
};
struct Tone {
    double period = 20.0;  ///< samples
};
struct Chirp {
    double f0 = 0.01;  ///< cycles per sample at t = 0
    double f1 = 0.1;   ///< cycles per sample at t = n
};

using Kind = std::variant<WhiteNoise, RandomWalk, Fbm, BrokenTrend, Tone, Chirp>;

}  // namespace synth

struct SynthSpec {
    synth::Kind kind;
    std::size_t n = 1024;
    std::uint64_t seed = 0;
};

enum class FbmMethod { DaviesHarte, Hosking };

namespace detail {

/// Autocovariance of unit-variance fractional Gaussian noise.
inline double fgn_autocovariance(std::size_t lag, double h) {
    const double k = static_cast<double>(lag);
    const double e = 2.0 * h;
    return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

/// Circulant embedding of size 2n. Empty when the embedding has negative eigenvalues.
inline std::vector<double> fgn_davies_harte(std::size_t n, double h, Rng& rng) {
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k) {
        row[k] = fgn_autocovariance(k, h);
    }
    for (std::size_t k = 1; k < n; ++k) {
        row[m - k] = row[k];
    }
    const auto eig = fft::transform(row, fft::Direction::Forward);
    double largest = 0.0;
    for (const auto& v : eig) {
        largest = std::max(largest, v.real());
    }
    std::vector<double> lambda(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double v = eig[j].real();
        if (v < -1e-10 * largest) {
            return {};
        }
        lambda[j] = std::max(v, 0.0);
    }
    const double md = static_cast<double>(m);
    std::vector<std::complex<double>> w(m);
    w[0] = std::sqrt(lambda[0] / md) * rng.normal();
    w[n] = std::sqrt(lambda[n] / md) * rng.normal();
    for (std::size_t j = 1; j < n; ++j) {
        const double s = std::sqrt(lambda[j] / (2.0 * md));
        const double re = rng.normal();
        const double im = rng.normal();
        w[j] = {s * re, s * im};
        w[m - j] = std::conj(w[j]);
    }
    const auto z = fft::transform(w, fft::Direction::Forward);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = z[i].real();
    }
    return out;
}

/// Durbin-Levinson recursion; exact but O(n^2).
inline std::vector<double> fgn_hosking(std::size_t n, double h, Rng& rng) {
    std::vector<double> gamma(n);
    for (std::size_t k = 0; k < n; ++k) {
        gamma[k] = fgn_autocovariance(k, h);
    }
    std::vector<double> out(n);
    std::vector<double> phi;
    std::vector<double> next;
    double variance = gamma[0];
    out[0] = std::sqrt(variance) * rng.normal();
    for (std::size_t t = 1; t < n; ++t) {
        double num = gamma[t];
        for (std::size_t j = 0; j < phi.size(); ++j) {
            num -= phi[j] * gamma[t - 1 - j];
        }
        const double reflection = num / variance;
        next.assign(t, 0.0);
        for (std::size_t j = 0; j + 1 < t; ++j) {
            next[j] = phi[j] - reflection * phi[t - 2 - j];
        }
        next[t - 1] = reflection;
        phi.swap(next);
        variance *= 1.0 - reflection * reflection;
        double mean = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            mean += phi[j] * out[t - 1 - j];
        }
        out[t] = mean + std::sqrt(variance) * rng.normal();
    }
    return out;
}

}  // namespace detail

/// n samples of unit-variance fractional Gaussian noise (increments of fBm).
inline std::vector<double> fractional_gaussian_noise(std::size_t n, double h, std::uint64_t seed,
                                                     FbmMethod method = FbmMethod::DaviesHarte) {
    detail::require(h > 0.0 && h < 1.0, Errc::InvalidSpec, "fBm Hurst index must lie in (0, 1)");
    detail::require(n >= 2, Errc::InvalidSpec, "need at least two samples");
    if (method == FbmMethod::DaviesHarte) {
        Rng rng(seed);
        auto out = detail::fgn_davies_harte(n, h, rng);
        if (!out.empty()) {
            return out;
        }
    }
    Rng rng(seed);
    return detail::fgn_hosking(n, h, rng);
}

/// First differences x[t+1] - x[t].
inline std::vector<double> increments(std::span<const double> values) {
    std::vector<double> out;
    for (std::size_t i = 1; i < values.size(); ++i) {
        out.push_back(values[i] - values[i - 1]);
    }
    return out;
}

inline void validate(const SynthSpec& spec) {
    detail::require(spec.n >= 16, Errc::InvalidSpec, "synthetic series need n >= 16");
    std::visit(
        [](const auto& kind) {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, synth::Fbm>) {
                detail::require(kind.h > 0.0 && kind.h < 1.0, Errc::InvalidSpec, "fBm h must lie in (0, 1)");
            } else if constexpr (std::is_same_v<K, synth::BrokenTrend>) {
                detail::require(kind.break_frac > 0.0 && kind.break_frac < 1.0, Errc::InvalidSpec,
                                "break_frac must lie in (0, 1)");
                detail::require(kind.noise_sd >= 0.0 && std::isfinite(kind.noise_sd), Errc::InvalidSpec,
                                "noise_sd must be non-negative");
                detail::require(std::isfinite(kind.level_shift) && std::isfinite(kind.slope_shift) &&
                                    std::isfinite(kind.base_slope),
                                Errc::InvalidSpec, "trend parameters must be finite");
            } else if constexpr (std::is_same_v<K, synth::Tone>) {
                detail::require(kind.period > 0.0 && std::isfinite(kind.period), Errc::InvalidSpec,
                                "tone period must be positive");
            } else if constexpr (std::is_same_v<K, synth::Chirp>) {
                detail::require(kind.f0 >= 0.0 && kind.f1 >= 0.0 && std::isfinite(kind.f0) && std::isfinite(kind.f1),
                                Errc::InvalidSpec, "chirp frequencies must be non-negative");
            }
        },
        spec.kind);
}

inline std::string describe(const SynthSpec& spec) {
    const std::string tail = ",n=" + std::to_string(spec.n) + ",seed=" + std::to_string(spec.seed) + ")";
    return std::visit(
        [&](const auto& kind) -> std::string {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, synth::WhiteNoise>) {
                return "synth:white_noise(" + tail.substr(1);
            } else if constexpr (std::is_same_v<K, synth::RandomWalk>) {
                return "synth:random_walk(" + tail.substr(1);
            } else if constexpr (std::is_same_v<K, synth::Fbm>) {
                return "synth:fbm(h=" + format_double(kind.h) + tail;
            } else if constexpr (std::is_same_v<K, synth::BrokenTrend>) {
                return "synth:broken_trend(break_frac=" + format_double(kind.break_frac) +
                       ",level_shift=" + format_double(kind.level_shift) +
                       ",slope_shift=" + format_double(kind.slope_shift) +
                       ",noise_sd=" + format_double(kind.noise_sd) + tail;
            } else if constexpr (std::is_same_v<K, synth::Tone>) {
                return "synth:tone(period=" + format_double(kind.period) + tail;
            } else {
                return "synth:chirp(f0=" + format_double(kind.f0) + ",f1=" + format_double(kind.f1) + tail;
            }
        },
        spec.kind);
}

/// Generated values only; see `generate` for the dated series.
inline std::vector<double> generate_values(const SynthSpec& spec) {
    validate(spec);
    const std::size_t n = spec.n;
    return std::visit(
        [&](const auto& kind) -> std::vector<double> {
            using K = std::decay_t<decltype(kind)>;
            std::vector<double> out(n);
            if constexpr (std::is_same_v<K, synth::WhiteNoise>) {
                Rng rng(spec.seed);
                for (auto& v : out) {
                    v = rng.normal();
                }
            } else if constexpr (std::is_same_v<K, synth::RandomWalk>) {
                Rng rng(spec.seed);
                double level = 0.0;
                for (auto& v : out) {
                    level += rng.normal();
                    v = level;
                }
            } else if constexpr (std::is_same_v<K, synth::Fbm>) {
                const auto noise = fractional_gaussian_noise(n, kind.h, spec.seed);
                double level = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    level += noise[i];
                    out[i] = level;
                }
            } else if constexpr (std::is_same_v<K, synth::BrokenTrend>) {
                Rng rng(spec.seed);
                const auto tb = static_cast<std::size_t>(std::floor(kind.break_frac * static_cast<double>(n)));
                for (std::size_t t = 0; t < n; ++t) {
                    const double td = static_cast<double>(t);
                    double v = kind.base_slope * td;
                    if (t > tb) {
                        v += kind.level_shift + kind.slope_shift * static_cast<double>(t - tb);
                    }
                    out[t] = v + kind.noise_sd * rng.normal();
                }
            } else if constexpr (std::is_same_v<K, synth::Tone>) {
                for (std::size_t t = 0; t < n; ++t) {
                    out[t] = std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / kind.period);
                }
            } else {
                const double nd = static_cast<double>(n);
                for (std::size_t t = 0; t < n; ++t) {
                    const double td = static_cast<double>(t);
                    out[t] = std::sin(2.0 * std::numbers::pi * (kind.f0 * td + 0.5 * (kind.f1 - kind.f0) * td * td / nd));
                }
            }
            return out;
        },
        spec.kind);
}

/// Deterministic in (spec, seed); dated on consecutive weekdays from 2000-01-03.
inline TimeSeries generate(const SynthSpec& spec) {
    using namespace std::chrono;
    auto values = generate_values(spec);
    auto dates = business_days(sys_days{year{2000} / January / 3}, values.size());
    return TimeSeries(std::move(values), std::move(dates), describe(spec));
}

}  // namespace emdscale
