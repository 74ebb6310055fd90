#pragma once

#include "emdscale/error.hpp"
#include "emdscale/ols.hpp"
#include "emdscale/series_io.hpp"
#include "emdscale/synth.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace emdscale {

/// Zivot-Andrews model C regression at one candidate break:
///
///   dX_t = c + alpha X_{t-1} + beta t + theta DU_t + gamma DT_t + sum_j d_j dX_{t-j} + e_t
///
/// with DU_t = 1[t > T_B] and DT_t = (t - T_B) 1[t > T_B], over t = k+1 .. T-1.
struct BreakRegressionFit {
    /// Column order of `coefficients`, `std_errors` and `t_stats`; lag d_j sits at Lag0 + j - 1.
    enum Column : std::size_t { Const = 0, Alpha, Trend, LevelShift, SlopeShift, Lag0 };

    std::size_t t_b = 0;
    std::size_t k = 0;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;
    double alpha_tstat = 0.0;
    double ssr = 0.0;
    double r_squared = 0.0;
    std::size_t nobs = 0;

    [[nodiscard]] double c() const { return coefficients[Const]; }
    [[nodiscard]] double alpha() const { return coefficients[Alpha]; }
    [[nodiscard]] double beta() const { return coefficients[Trend]; }
    [[nodiscard]] double theta() const { return coefficients[LevelShift]; }
    [[nodiscard]] double gamma() const { return coefficients[SlopeShift]; }
    /// Lag coefficient d_j, j = 1..k.
    [[nodiscard]] double d(std::size_t j) const { return coefficients[Lag0 + j - 1]; }
};

/// Asymptotic model-C critical values of Zivot and Andrews (1992).
struct CriticalValues {
    double p01 = -5.57;
    double p05 = -5.08;
    double p10 = -4.82;

    friend bool operator==(const CriticalValues&, const CriticalValues&) = default;
};

struct Rejection {
    bool p01 = false;
    bool p05 = false;
    bool p10 = false;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct CandidateStat {
    std::size_t t_b = 0;
    double tstat = 0.0;

    friend bool operator==(const CandidateStat&, const CandidateStat&) = default;
};

struct BreakTestResult {
    std::size_t break_index = 0;
    double min_tstat = 0.0;
    std::vector<CandidateStat> candidate_tstats;  ///< estimable candidates, increasing t_b
    CriticalValues critical_values;
    Rejection reject_unit_root;
    std::size_t k_used = 0;
    double trim = 0.15;
};

struct FixedLags {
    std::size_t k = 0;
};

/// General-to-specific: the largest k <= k_max whose last lag is significant at |t| >= 1.645.
struct TsigLags {
    std::optional<std::size_t> k_max;  ///< floor(12 (T/100)^(1/4)) when empty
};

using LagPolicy = std::variant<FixedLags, TsigLags>;

inline std::size_t default_max_lags(std::size_t length) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(length) / 100.0, 0.25)));
}

namespace detail {

/// Rows t = k+1 .. T-1 of dX_t and of the break-independent regressors [1, X_{t-1}, t, dX_{t-1..t-k}].
struct ZaBaseDesign {
    Eigen::MatrixXd base;
    Eigen::VectorXd dy;
    std::size_t first_t = 0;
};

inline ZaBaseDesign za_base_design(std::span<const double> x, std::size_t k) {
    const std::size_t total = x.size();
    detail::require(total > k + 1, Errc::TooShort, "series too short for the lag order");
    const std::size_t nobs = total - k - 1;
    ZaBaseDesign out;
    out.first_t = k + 1;
    out.base.resize(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(3 + k));
    out.dy.resize(static_cast<Eigen::Index>(nobs));
    for (std::size_t row = 0; row < nobs; ++row) {
        const std::size_t t = row + out.first_t;
        const auto r = static_cast<Eigen::Index>(row);
        out.dy(r) = x[t] - x[t - 1];
        out.base(r, 0) = 1.0;
        out.base(r, 1) = x[t - 1];
        out.base(r, 2) = static_cast<double>(t);
        for (std::size_t j = 1; j <= k; ++j) {
            out.base(r, static_cast<Eigen::Index>(2 + j)) = x[t - j] - x[t - j - 1];
        }
    }
    return out;
}

inline void require_valid_break(std::size_t total, std::size_t t_b, std::size_t k) {
    if (t_b < k + 1 || t_b + 3 > total) {
        detail::fail(Errc::OutOfRange, "break index " + std::to_string(t_b) +
                                           " leaves no observations on one side of the break");
    }
}

}  // namespace detail

inline BreakRegressionFit za_regression(std::span<const double> x, std::size_t t_b, std::size_t k) {
    detail::require(x.size() >= k + 10, Errc::TooShort, "series too short for the regression");
    detail::require_valid_break(x.size(), t_b, k);
    const auto base = detail::za_base_design(x, k);
    const Eigen::Index nobs = base.base.rows();
    const Eigen::Index p = 5 + static_cast<Eigen::Index>(k);
    Eigen::MatrixXd design(nobs, p);
    design.col(0) = base.base.col(0);
    design.col(1) = base.base.col(1);
    design.col(2) = base.base.col(2);
    for (Eigen::Index row = 0; row < nobs; ++row) {
        const std::size_t t = static_cast<std::size_t>(row) + base.first_t;
        design(row, 3) = t > t_b ? 1.0 : 0.0;
        design(row, 4) = t > t_b ? static_cast<double>(t - t_b) : 0.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
        design.col(static_cast<Eigen::Index>(5 + j)) = base.base.col(static_cast<Eigen::Index>(3 + j));
    }
    const auto fit = ols(design, base.dy);
    BreakRegressionFit out;
    out.t_b = t_b;
    out.k = k;
    out.nobs = static_cast<std::size_t>(nobs);
    out.ssr = fit.ssr;
    out.r_squared = fit.r_squared();
    for (Eigen::Index j = 0; j < p; ++j) {
        out.coefficients.push_back(fit.coefficients(j));
        out.std_errors.push_back(fit.std_errors(j));
        out.t_stats.push_back(fit.t_stat(j));
    }
    out.alpha_tstat = out.t_stats[BreakRegressionFit::Alpha];
    return out;
}

inline BreakRegressionFit za_regression(const TimeSeries& series, std::size_t t_b, std::size_t k) {
    return za_regression(series.values(), t_b, k);
}

inline std::size_t select_lags(std::span<const double> x, std::size_t t_b, std::size_t k_max) {
    for (std::size_t k = k_max; k >= 1; --k) {
        if (t_b < k + 1) {
            continue;
        }
        const auto fit = za_regression(x, t_b, k);
        if (std::abs(fit.t_stats[BreakRegressionFit::Lag0 + k - 1]) >= 1.645) {
            return k;
        }
    }
    return 0;
}

inline std::size_t select_lags(const TimeSeries& series, std::size_t t_b, std::size_t k_max) {
    return select_lags(series.values(), t_b, k_max);
}

/// Inclusive candidate range [ceil(trim T), floor((1 - trim) T)].
inline std::pair<std::size_t, std::size_t> candidate_window(std::size_t length, double trim) {
    const double total = static_cast<double>(length);
    return {static_cast<std::size_t>(std::ceil(trim * total)),
            static_cast<std::size_t>(std::floor((1.0 - trim) * total))};
}

/**
 * alpha t-statistic at every candidate break for a fixed lag order.
 *
 * The break-independent regressors are QR-factored once; for each candidate
 * only DU and DT are orthogonalized against that basis (twice, for
 * stability) and appended as two more columns of the triangular factor.
 * Candidates whose dummies are numerically dependent on the base are left out.
 */
inline std::vector<CandidateStat> za_scan(std::span<const double> x, double trim, std::size_t k) {
    constexpr double rank_tol = 1e-10;
    const std::size_t total = x.size();
    const auto [lo, hi] = candidate_window(total, trim);
    const auto base = detail::za_base_design(x, k);
    const Eigen::Index nobs = base.base.rows();
    const Eigen::Index pb = base.base.cols();
    const Eigen::Index p = pb + 2;
    detail::require(nobs > p, Errc::TooShort, "series too short for the regression");

    const Eigen::VectorXd norms = base.base.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = base.base * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(rank_tol);
    if (qr.rank() < pb) {
        detail::fail(Errc::AllRankDeficient, "break-independent regressors are rank deficient");
    }
    const Eigen::MatrixXd q1 = qr.householderQ() * Eigen::MatrixXd::Identity(nobs, pb);
    const Eigen::MatrixXd r11 = qr.matrixR().topLeftCorner(pb, pb).template triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation();
    // Position of the X_{t-1} column after pivoting.
    Eigen::Index alpha_pos = 0;
    for (Eigen::Index j = 0; j < pb; ++j) {
        if (perm.indices()(j) == 1) {
            alpha_pos = j;
        }
    }
    const Eigen::VectorXd z1 = q1.transpose() * base.dy;
    const Eigen::VectorXd y_perp = base.dy - q1 * z1;

    std::vector<CandidateStat> out;
    Eigen::MatrixXd dummies(nobs, 2);
    Eigen::MatrixXd r(p, p);
    Eigen::VectorXd z(p);
    for (std::size_t t_b = std::max(lo, k + 1); t_b <= hi && t_b + 3 <= total; ++t_b) {
        for (Eigen::Index row = 0; row < nobs; ++row) {
            const std::size_t t = static_cast<std::size_t>(row) + base.first_t;
            dummies(row, 0) = t > t_b ? 1.0 : 0.0;
            dummies(row, 1) = t > t_b ? static_cast<double>(t - t_b) : 0.0;
        }
        const Eigen::Vector2d dnorms = dummies.colwise().norm().transpose();
        dummies.col(0) /= dnorms(0);
        dummies.col(1) /= dnorms(1);

        Eigen::MatrixXd coupling = q1.transpose() * dummies;
        Eigen::MatrixXd resid = dummies - q1 * coupling;
        const Eigen::MatrixXd again = q1.transpose() * resid;
        resid -= q1 * again;
        coupling += again;

        const double r44 = resid.col(0).norm();
        if (!(r44 > rank_tol)) {
            continue;
        }
        Eigen::VectorXd qa = resid.col(0) / r44;
        double r45 = qa.dot(resid.col(1));
        Eigen::VectorXd qb = resid.col(1) - r45 * qa;
        const double extra = qa.dot(qb);
        qb -= extra * qa;
        r45 += extra;
        const double r55 = qb.norm();
        if (!(r55 > rank_tol)) {
            continue;
        }
        qb /= r55;

        r.setZero();
        r.topLeftCorner(pb, pb) = r11;
        r.block(0, pb, pb, 2) = coupling;
        r(pb, pb) = r44;
        r(pb, pb + 1) = r45;
        r(pb + 1, pb + 1) = r55;
        z.head(pb) = z1;
        z(pb) = qa.dot(y_perp);
        z(pb + 1) = qb.dot(y_perp);

        const Eigen::VectorXd coef = r.template triangularView<Eigen::Upper>().solve(z);
        const Eigen::VectorXd residual = y_perp - z(pb) * qa - z(pb + 1) * qb;
        const double sigma2 = residual.squaredNorm() / static_cast<double>(nobs - p);
        // Row alpha_pos of R^{-1}: solve R^T w = e_alpha.
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(p);
        unit(alpha_pos) = 1.0;
        const Eigen::VectorXd w = r.transpose().template triangularView<Eigen::Lower>().solve(unit);
        const double se = std::sqrt(sigma2 * w.squaredNorm());
        // Scaling cancels in the t-ratio.
        out.push_back({t_b, coef(alpha_pos) / se});
    }
    if (out.empty()) {
        detail::fail(Errc::AllRankDeficient, "no candidate break gives a full-rank regression");
    }
    return out;
}

/**
 * Zivot-Andrews model C test: the break is the candidate minimizing the
 * alpha t-statistic (ties go to the earliest candidate) and the unit root is
 * rejected at a level when that minimum is below the critical value.
 *
 * Under the t-sig policy the lag order is chosen at the break found by a
 * k = 0 scan, and the scan is then repeated with that order.
 */
inline BreakTestResult za_test(std::span<const double> x, double trim = 0.15, LagPolicy policy = TsigLags{}) {
    detail::require(trim > 0.0 && trim < 0.5, Errc::InvalidArgument, "trim must lie in (0, 0.5)");
    detail::require(x.size() >= 50, Errc::TooShort, "break test needs at least 50 samples");

    auto argmin = [](const std::vector<CandidateStat>& stats) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < stats.size(); ++i) {
            if (stats[i].tstat < stats[best].tstat) {
                best = i;
            }
        }
        return stats[best];
    };

    std::size_t k = 0;
    std::vector<CandidateStat> stats;
    if (const auto* fixed = std::get_if<FixedLags>(&policy)) {
        k = fixed->k;
        stats = za_scan(x, trim, k);
    } else {
        const auto& tsig = std::get<TsigLags>(policy);
        const std::size_t k_max = tsig.k_max.value_or(default_max_lags(x.size()));
        stats = za_scan(x, trim, 0);
        k = select_lags(x, argmin(stats).t_b, k_max);
        if (k > 0) {
            stats = za_scan(x, trim, k);
        }
    }

    BreakTestResult out;
    const auto best = argmin(stats);
    out.break_index = best.t_b;
    out.min_tstat = best.tstat;
    out.candidate_tstats = std::move(stats);
    out.k_used = k;
    out.trim = trim;
    out.reject_unit_root = {out.min_tstat < out.critical_values.p01, out.min_tstat < out.critical_values.p05,
                            out.min_tstat < out.critical_values.p10};
    return out;
}

inline BreakTestResult za_test(const TimeSeries& series, double trim = 0.15, LagPolicy policy = TsigLags{}) {
    return za_test(series.values(), trim, policy);
}

/// TSB = points [0, break_index], TSA = points (break_index, end].
inline std::pair<TimeSeries, TimeSeries> split_at_break(const TimeSeries& series, const BreakTestResult& result) {
    const std::size_t b = result.break_index;
    if (b + 1 >= series.size()) {
        detail::fail(Errc::OutOfRange, "break index leaves no points after the break");
    }
    return {slice(series, 0, b + 1), slice(series, b + 1, series.size())};
}

/**
 * Finite-sample critical values re-derived by simulation: minimum t-statistics
 * of `reps` Gaussian random walks of length n (k = 0), seeds seed, seed+1, ...
 */
inline CriticalValues za_critical_values_mc(std::size_t n, std::size_t reps, std::uint64_t seed,
                                            double trim = 0.15) {
    detail::require(reps >= 100, Errc::InvalidArgument, "need at least 100 replications");
    std::vector<double> mins;
    mins.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto walk = generate_values({synth::RandomWalk{}, n, seed + i});
        mins.push_back(za_test(walk, trim, FixedLags{0}).min_tstat);
    }
    std::sort(mins.begin(), mins.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(mins.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, mins.size() - 1);
        return mins[lo] + (pos - static_cast<double>(lo)) * (mins[hi] - mins[lo]);
    };
    return {quantile(0.01), quantile(0.05), quantile(0.10)};
}

}  // namespace emdscale
