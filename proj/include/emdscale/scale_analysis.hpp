#pragma once

#include "emdscale/breaktest.hpp"
#include "emdscale/emd.hpp"
#include "emdscale/error.hpp"
#include "emdscale/hurst.hpp"
#include "emdscale/series_io.hpp"
#include "emdscale/spectral.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace emdscale {

enum class SeriesKind { TSO, TSB, TSA };

constexpr std::string_view to_string(SeriesKind kind) noexcept {
    switch (kind) {
    case SeriesKind::TSO: return "TSO";
    case SeriesKind::TSB: return "TSB";
    case SeriesKind::TSA: return "TSA";
    }
    return "TSO";
}

/**
 * Root energy of each IMF over the sum of root energies:
 * NV_i = sqrt(sum_t imf_i(t)^2) / sum_j sqrt(sum_t imf_j(t)^2).
 *
 * The residue is excluded unless `include_residue` is set, in which case it
 * contributes a final entry and joins the denominator.
 */
inline std::vector<double> normalized_variance(const Decomposition& decomp, bool include_residue = false) {
    detail::require(decomp.imf_count() >= 1, Errc::InvalidArgument, "normalized variance needs at least one IMF");
    std::vector<double> root_energy;
    auto add = [&](std::span<const double> component) {
        double energy = 0.0;
        for (double v : component) {
            energy += v * v;
        }
        root_energy.push_back(std::sqrt(energy));
    };
    for (const auto& imf : decomp.imfs) {
        add(imf);
    }
    if (include_residue) {
        add(decomp.residue);
    }
    double total = 0.0;
    for (double e : root_energy) {
        total += e;
    }
    if (!(total > 0.0)) {
        detail::fail(Errc::AllZeroImfs, "every IMF is identically zero");
    }
    for (double& e : root_energy) {
        e /= total;
    }
    return root_energy;
}

struct FixedSplit {
    std::size_t index = 5;  ///< number of short-term IMFs
};

/// Split before the first IMF from which every Hurst exponent is at least `threshold`.
struct ThresholdSplit {
    double threshold = 0.65;
};

using SplitPolicy = std::variant<FixedSplit, ThresholdSplit>;

enum class SplitStatus {
    Split,
    NoSplitAllShortTerm,  ///< no IMF group reaches the threshold
    NoSplitAllLongTerm,   ///< every IMF reaches it
};

constexpr std::string_view to_string(SplitStatus status) noexcept {
    switch (status) {
    case SplitStatus::Split: return "split";
    case SplitStatus::NoSplitAllShortTerm: return "no_split_all_short_term";
    case SplitStatus::NoSplitAllLongTerm: return "no_split_all_long_term";
    }
    return "split";
}

struct ScaleSplit {
    std::size_t split_index = 0;  ///< IMFs 1..split_index are short-term
    SplitStatus status = SplitStatus::Split;

    [[nodiscard]] bool ok() const noexcept { return status == SplitStatus::Split; }
};

/// Hurst exponents in IMF order; NaN marks an IMF without an estimate and never counts as long-term.
inline ScaleSplit classify_scales(std::span<const double> imf_h, const SplitPolicy& policy = ThresholdSplit{}) {
    detail::require(imf_h.size() >= 2, Errc::InvalidArgument, "classification needs at least two IMFs");
    std::size_t split = 0;
    if (const auto* fixed = std::get_if<FixedSplit>(&policy)) {
        split = fixed->index;
    } else {
        const double threshold = std::get<ThresholdSplit>(policy).threshold;
        split = imf_h.size();
        while (split > 0 && imf_h[split - 1] >= threshold) {
            --split;
        }
    }
    ScaleSplit out{split, SplitStatus::Split};
    if (split == 0) {
        out.status = SplitStatus::NoSplitAllLongTerm;
    } else if (split >= imf_h.size()) {
        out.status = SplitStatus::NoSplitAllShortTerm;
    }
    return out;
}

struct ImfScale {
    std::size_t index = 0;  ///< 1-based IMF number
    std::optional<double> tau_days;
    std::optional<double> tau_zero_crossing_days;
    std::optional<HurstEstimate> hurst;
    double nv = 0.0;
    std::size_t sift_iterations = 0;

    friend bool operator==(const ImfScale&, const ImfScale&) = default;
};

struct ScaleReport {
    std::string label;
    SeriesKind series_kind = SeriesKind::TSO;
    std::size_t n_points = 0;
    std::vector<ImfScale> per_imf;
    std::size_t split_index = 0;
    SplitStatus split_status = SplitStatus::Split;
    /// Mean period of the last short-term IMF, the representative scale of the short-term group.
    std::optional<double> short_term_tau_days;
    std::optional<HurstEstimate> h_st;
    std::optional<HurstEstimate> h_lt;
    std::optional<HurstEstimate> h_residue;
    std::optional<double> nv_residue;
    std::optional<BreakTestResult> break_info;

    [[nodiscard]] std::size_t imf_count() const noexcept { return per_imf.size(); }
};

inline bool operator==(const BreakTestResult& a, const BreakTestResult& b) {
    return a.break_index == b.break_index && a.min_tstat == b.min_tstat &&
           a.candidate_tstats == b.candidate_tstats && a.critical_values == b.critical_values &&
           a.reject_unit_root == b.reject_unit_root && a.k_used == b.k_used && a.trim == b.trim;
}

inline bool operator==(const ScaleReport& a, const ScaleReport& b) {
    return a.label == b.label && a.series_kind == b.series_kind && a.n_points == b.n_points &&
           a.per_imf == b.per_imf && a.split_index == b.split_index && a.split_status == b.split_status &&
           a.short_term_tau_days == b.short_term_tau_days && a.h_st == b.h_st && a.h_lt == b.h_lt &&
           a.h_residue == b.h_residue && a.nv_residue == b.nv_residue && a.break_info == b.break_info;
}

struct AnalysisConfig {
    EmdConfig emd;
    SplitPolicy split = ThresholdSplit{};
    HurstOptions hurst;
    bool nv_include_residue = false;
};

namespace detail {

inline std::optional<HurstEstimate> try_hurst(std::span<const double> values, const HurstOptions& options) {
    try {
        return hurst_exponent(values, std::nullopt, options);
    } catch (const Error& e) {
        if (e.code() == Errc::DegenerateSeries || e.code() == Errc::TooShort) {
            return std::nullopt;
        }
        throw;
    }
}

}  // namespace detail

/**
 * Assembles the per-series report from already computed per-IMF pieces.
 * `periods`, `imf_hurst` and `nv` must each have one entry per IMF.
 * The reconstructions X_ST (IMFs 1..split) and X_LT (the remaining IMFs
 * plus the residue) are estimated here.
 */
inline ScaleReport build_report(const Decomposition& decomp,
                                std::span<const std::optional<InstantaneousAttributes>> periods,
                                std::span<const std::optional<HurstEstimate>> imf_hurst, std::span<const double> nv,
                                std::optional<BreakTestResult> break_info, SeriesKind kind,
                                const AnalysisConfig& config = {}) {
    const std::size_t count = decomp.imf_count();
    if (periods.size() != count || imf_hurst.size() != count || nv.size() < count || nv.size() > count + 1) {
        detail::fail(Errc::InconsistentInputs, "per-IMF inputs do not match the number of IMFs");
    }
    for (const auto& imf : decomp.imfs) {
        if (imf.size() != decomp.length()) {
            detail::fail(Errc::InconsistentInputs, "IMF length differs from the residue length");
        }
    }
    detail::require(count >= 1, Errc::InvalidArgument, "report needs at least one IMF");

    ScaleReport out;
    out.label = decomp.source_label;
    out.series_kind = kind;
    out.n_points = decomp.length();
    out.break_info = std::move(break_info);
    std::vector<double> hs;
    for (std::size_t k = 0; k < count; ++k) {
        ImfScale row;
        row.index = k + 1;
        if (periods[k]) {
            row.tau_days = periods[k]->mean_period_days;
            row.tau_zero_crossing_days = periods[k]->zero_crossing_period_days;
        }
        row.hurst = imf_hurst[k];
        row.nv = nv[k];
        row.sift_iterations = k < decomp.sift_counts.size() ? decomp.sift_counts[k] : 0;
        hs.push_back(imf_hurst[k] ? imf_hurst[k]->h : std::numeric_limits<double>::quiet_NaN());
        out.per_imf.push_back(std::move(row));
    }
    if (nv.size() == count + 1) {
        out.nv_residue = nv[count];
    }

    // A lone IMF cannot be split; it is reported as the short-term group.
    const ScaleSplit split = count >= 2 ? classify_scales(hs, config.split)
                                        : ScaleSplit{count, SplitStatus::NoSplitAllShortTerm};
    out.split_status = split.status;
    out.split_index = std::min(split.split_index, count);
    if (out.split_index > 0) {
        out.short_term_tau_days = out.per_imf[out.split_index - 1].tau_days;
        out.h_st = detail::try_hurst(reconstruct(decomp, imf_range(0, out.split_index), false), config.hurst);
    }
    out.h_lt = detail::try_hurst(reconstruct(decomp, imf_range(out.split_index, count), true), config.hurst);
    out.h_residue = detail::try_hurst(decomp.residue, config.hurst);
    return out;
}

struct SeriesAnalysis {
    Decomposition decomposition;
    ScaleReport report;
};

/// decompose -> per-IMF tau, H and NV -> report.
inline SeriesAnalysis analyze_series(const TimeSeries& series, SeriesKind kind, const AnalysisConfig& config = {},
                                     std::optional<BreakTestResult> break_info = std::nullopt) {
    SeriesAnalysis out;
    out.decomposition = decompose(series, config.emd);
    const auto& decomp = out.decomposition;
    if (decomp.imf_count() == 0) {
        detail::fail(Errc::NoOscillation, "series decomposed into a residue only");
    }
    std::vector<std::optional<InstantaneousAttributes>> periods;
    std::vector<std::optional<HurstEstimate>> hurst;
    for (const auto& imf : decomp.imfs) {
        try {
            periods.push_back(instantaneous_attributes(imf, TimeSeries::dt()));
        } catch (const Error& e) {
            if (e.code() != Errc::NoOscillation && e.code() != Errc::TooShort) {
                throw;
            }
            periods.push_back(std::nullopt);
        }
        hurst.push_back(detail::try_hurst(imf, config.hurst));
    }
    const auto nv = normalized_variance(decomp, config.nv_include_residue);
    out.report = build_report(decomp, periods, hurst, nv, std::move(break_info), kind, config);
    return out;
}

}  // namespace emdscale
