#pragma once

#include "emdscale/breaktest.hpp"
#include "emdscale/emd.hpp"
#include "emdscale/error.hpp"
#include "emdscale/hurst.hpp"
#include "emdscale/json_io.hpp"
#include "emdscale/scale_analysis.hpp"
#include "emdscale/series_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace emdscale {

enum class PipelineMode { Full, NoBreak };
enum class OutputFormat { Json, Csv, Both };

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;
    std::optional<PriceColumn> column;  ///< Adj Close, else Close, when empty
    PipelineMode mode = PipelineMode::Full;
    double trim = 0.15;
    LagPolicy lag_policy = TsigLags{};
    EmdConfig emd;
    SplitPolicy split_policy = ThresholdSplit{};
    HurstOptions hurst;
    bool nv_include_residue = false;
    /// Nine IMFs and a fixed split after IMF5.
    bool paper_repro = false;
    std::filesystem::path output_dir = "out";
    OutputFormat format = OutputFormat::Both;
    /// Series (TSO/TSB/TSA) shorter than this are skipped with a warning.
    std::size_t min_analysis_length = 256;
    std::size_t jobs = 0;  ///< 0 = hardware concurrency

    /// Settings after `paper_repro` is applied.
    [[nodiscard]] AnalysisConfig analysis() const {
        AnalysisConfig out;
        out.emd = emd;
        out.split = split_policy;
        out.hurst = hurst;
        out.nv_include_residue = nv_include_residue;
        if (paper_repro) {
            out.emd.max_imfs = 9;
            out.split = FixedSplit{5};
        }
        return out;
    }
};

enum class StageStatus { Written, Skipped, Failed };

struct KindOutcome {
    SeriesKind kind = SeriesKind::TSO;
    StageStatus status = StageStatus::Written;
    std::string message;
    std::vector<std::filesystem::path> files;
};

struct InputOutcome {
    std::filesystem::path input;
    std::filesystem::path output_dir;
    bool parse_failed = false;
    std::string error;
    std::vector<std::string> warnings;
    std::vector<KindOutcome> kinds;
    std::vector<std::filesystem::path> files;  ///< files not tied to one series kind

    [[nodiscard]] bool failed() const {
        return parse_failed || std::any_of(kinds.begin(), kinds.end(),
                                           [](const KindOutcome& k) { return k.status == StageStatus::Failed; });
    }
};

struct PipelineResult {
    std::vector<InputOutcome> inputs;

    /// 0 when every series succeeded (skips are not failures), 1 otherwise.
    [[nodiscard]] int exit_code() const {
        return std::any_of(inputs.begin(), inputs.end(), [](const InputOutcome& i) { return i.failed(); }) ? 1 : 0;
    }
};

namespace detail {

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(Errc::Io, "cannot open '" + path.string() + "' for writing");
    }
    out << text;
    out.close();
    if (!out) {
        fail(Errc::Io, "failed writing '" + path.string() + "'");
    }
    return path;
}

inline std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string imf_table_csv(const ScaleReport& report) {
    std::ostringstream out;
    out << "index,tau_days,tau_zero_crossing_days,h,h_stderr,nv\n";
    for (const auto& row : report.per_imf) {
        out << row.index << ',' << optional_cell(row.tau_days) << ',' << optional_cell(row.tau_zero_crossing_days)
            << ',' << (row.hurst ? format_double(row.hurst->h) : "") << ','
            << (row.hurst ? format_double(row.hurst->std_error) : "") << ',' << format_double(row.nv) << '\n';
    }
    return out.str();
}

inline std::string reconstruction_csv(const TimeSeries& series, const Decomposition& decomp, std::size_t split) {
    const std::size_t count = decomp.imf_count();
    const auto st = reconstruct(decomp, imf_range(0, std::min(split, count)), false);
    const auto lt = reconstruct(decomp, imf_range(std::min(split, count), count), true);
    std::ostringstream out;
    out << "t,date,x,x_st,x_lt\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << i << ',' << format_date(series.dates()[i]) << ',' << format_double(series.values()[i]) << ','
            << format_double(st[i]) << ',' << format_double(lt[i]) << '\n';
    }
    return out.str();
}

inline std::string rs_points_csv(const HurstEstimate& est) {
    std::ostringstream out;
    write_rs_points_csv(out, est.points);
    return out.str();
}

inline std::string tstat_curve_csv(const BreakTestResult& result, const TimeSeries& series) {
    std::ostringstream out;
    out << "t_b,date,tstat\n";
    for (const auto& c : result.candidate_tstats) {
        out << c.t_b << ',' << format_date(series.dates()[c.t_b]) << ',' << format_double(c.tstat) << '\n';
    }
    return out.str();
}

inline std::vector<std::filesystem::path> write_kind_outputs(const std::filesystem::path& dir, const TimeSeries& series,
                                                             const SeriesAnalysis& analysis, OutputFormat format) {
    std::vector<std::filesystem::path> files;
    const auto& report = analysis.report;
    const std::string prefix = lowercase(to_string(report.series_kind));
    if (format != OutputFormat::Csv) {
        files.push_back(write_text(dir / (prefix + "_report.json"), to_json(report).dump(2) + "\n"));
    }
    if (format != OutputFormat::Json) {
        std::ostringstream imfs;
        write_decomposition_csv(imfs, analysis.decomposition);
        files.push_back(write_text(dir / (prefix + "_imfs.csv"), imfs.str()));
        files.push_back(write_text(dir / (prefix + "_imf_table.csv"), imf_table_csv(report)));
        files.push_back(write_text(dir / (prefix + "_reconstructed.csv"),
                                   reconstruction_csv(series, analysis.decomposition, report.split_index)));
        const auto rs_dir = dir / (prefix + "_rs");
        std::filesystem::create_directories(rs_dir);
        for (const auto& row : report.per_imf) {
            if (row.hurst) {
                files.push_back(write_text(rs_dir / ("imf" + std::to_string(row.index) + ".csv"), rs_points_csv(*row.hurst)));
            }
        }
        if (report.h_st) {
            files.push_back(write_text(rs_dir / "x_st.csv", rs_points_csv(*report.h_st)));
        }
        if (report.h_lt) {
            files.push_back(write_text(rs_dir / "x_lt.csv", rs_points_csv(*report.h_lt)));
        }
        if (report.h_residue) {
            files.push_back(write_text(rs_dir / "residue.csv", rs_points_csv(*report.h_residue)));
        }
    }
    return files;
}

inline InputOutcome process_input(const std::filesystem::path& input, const PipelineConfig& config) {
    InputOutcome outcome;
    outcome.input = input;
    outcome.output_dir = config.output_dir / input.stem();

    std::optional<TimeSeries> series;
    try {
        std::ifstream in(input, std::ios::binary);
        if (!in) {
            fail(Errc::Io, "cannot open '" + input.string() + "'");
        }
        series = parse_ohlcv_csv(in, config.column, input.stem().string());
        if (series->dropped_rows() > 0) {
            outcome.warnings.push_back(std::to_string(series->dropped_rows()) + " rows dropped while parsing");
        }
    } catch (const std::exception& e) {
        outcome.parse_failed = true;
        outcome.error = std::string("ParseError: ") + e.what();
        return outcome;
    }

    const auto analysis_config = config.analysis();
    std::filesystem::create_directories(outcome.output_dir);

    std::optional<BreakTestResult> break_info;
    std::vector<std::pair<SeriesKind, TimeSeries>> parts{{SeriesKind::TSO, *series}};
    if (config.mode == PipelineMode::Full) {
        try {
            break_info = za_test(*series, config.trim, config.lag_policy);
            auto [tsb, tsa] = split_at_break(*series, *break_info);
            parts.emplace_back(SeriesKind::TSB, std::move(tsb));
            parts.emplace_back(SeriesKind::TSA, std::move(tsa));
            if (config.format != OutputFormat::Csv) {
                outcome.files.push_back(
                    write_text(outcome.output_dir / "break.json", to_json(*break_info, &*series).dump(2) + "\n"));
            }
            if (config.format != OutputFormat::Json) {
                outcome.files.push_back(
                    write_text(outcome.output_dir / "break_tstats.csv", tstat_curve_csv(*break_info, *series)));
            }
        } catch (const Error& e) {
            break_info.reset();
            outcome.warnings.push_back(std::string("TooShortForBreakTest: ") + e.what() +
                                       "; continuing without the break split");
        }
    }

    // The series kinds are independent; analyses run concurrently, outputs are written in kind order.
    std::vector<std::future<SeriesAnalysis>> pending(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].second.size() >= config.min_analysis_length) {
            pending[i] = std::async(std::launch::async, [&analysis_config, &break_info, &part = parts[i]] {
                return analyze_series(part.second, part.first, analysis_config, break_info);
            });
        }
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& [kind, part] = parts[i];
        KindOutcome ko;
        ko.kind = kind;
        if (!pending[i].valid()) {
            ko.status = StageStatus::Skipped;
            ko.message = std::string(to_string(kind)) + " has " + std::to_string(part.size()) +
                         " points, fewer than the " + std::to_string(config.min_analysis_length) + " required";
            outcome.warnings.push_back(ko.message);
            outcome.kinds.push_back(std::move(ko));
            continue;
        }
        try {
            const auto analysis = pending[i].get();
            ko.files = write_kind_outputs(outcome.output_dir, part, analysis, config.format);
            ko.status = StageStatus::Written;
        } catch (const std::exception& e) {
            ko.status = StageStatus::Failed;
            ko.message = std::string("DecompositionError: ") + e.what();
        }
        outcome.kinds.push_back(std::move(ko));
    }
    return outcome;
}

}  // namespace detail

/// Checks the configuration; throws Error(InvalidArgument) on anything that should stop the run up front.
inline void validate(const PipelineConfig& config) {
    if (config.inputs.empty()) {
        detail::fail(Errc::InvalidArgument, "no input files given");
    }
    detail::require(config.trim > 0.0 && config.trim < 0.5, Errc::InvalidArgument, "trim must lie in (0, 0.5)");
    config.emd.validate();
    std::set<std::string> stems;
    for (const auto& p : config.inputs) {
        if (!stems.insert(p.stem().string()).second) {
            detail::fail(Errc::InvalidArgument, "two inputs share the output name '" + p.stem().string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec || !std::filesystem::is_directory(config.output_dir)) {
        detail::fail(Errc::InvalidArgument, "output directory '" + config.output_dir.string() + "' is not writable");
    }
}

/**
 * Runs parse -> break test -> split -> per-series analysis for every input.
 * Inputs are processed in parallel and independently; a failing input is
 * recorded in its outcome and does not stop the others.
 */
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    validate(config);
    const std::size_t jobs =
        std::max<std::size_t>(1, config.jobs != 0 ? config.jobs : std::thread::hardware_concurrency());
    PipelineResult result;
    result.inputs.resize(config.inputs.size());
    for (std::size_t start = 0; start < config.inputs.size(); start += jobs) {
        const std::size_t stop = std::min(config.inputs.size(), start + jobs);
        if (stop - start == 1) {
            result.inputs[start] = detail::process_input(config.inputs[start], config);
            continue;
        }
        std::vector<std::future<InputOutcome>> pending;
        for (std::size_t i = start; i < stop; ++i) {
            pending.push_back(std::async(std::launch::async, detail::process_input, config.inputs[i], std::cref(config)));
        }
        for (std::size_t i = start; i < stop; ++i) {
            result.inputs[i] = pending[i - start].get();
        }
    }
    return result;
}

}  // namespace emdscale
