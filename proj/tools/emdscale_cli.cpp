// emdscale command line: batch analysis, synthetic series, break test and Hurst estimation.
//
// Exit codes: 0 success, 1 at least one input failed, 2 invalid configuration.
// Log verbosity follows SPDLOG_LEVEL (e.g. SPDLOG_LEVEL=debug); logs go to stderr.

#include "emdscale/emdscale.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace emdscale;

constexpr int kConfigError = 2;

std::size_t parse_count(const std::string& text, const std::string& what) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw Error(Errc::InvalidArgument, "bad " + what + " '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used == text.size()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw Error(Errc::InvalidArgument, "bad " + what + " '" + text + "'");
}

/// "tsig", "tsig:K" (K = max lags) or "fixed:K".
LagPolicy parse_lag_policy(const std::string& text) {
    if (text == "tsig") {
        return TsigLags{};
    }
    if (text.rfind("tsig:", 0) == 0) {
        return TsigLags{parse_count(text.substr(5), "maximum lag")};
    }
    if (text.rfind("fixed:", 0) == 0) {
        return FixedLags{parse_count(text.substr(6), "lag order")};
    }
    throw Error(Errc::InvalidArgument, "lag policy must be tsig, tsig:K or fixed:K, got '" + text + "'");
}

/// "auto", "auto:H" (threshold) or "fixed:J" (short-term IMF count).
SplitPolicy parse_split_policy(const std::string& text) {
    if (text == "auto") {
        return ThresholdSplit{};
    }
    if (text.rfind("auto:", 0) == 0) {
        return ThresholdSplit{parse_real(text.substr(5), "split threshold")};
    }
    if (text.rfind("fixed:", 0) == 0) {
        return FixedSplit{parse_count(text.substr(6), "split index")};
    }
    throw Error(Errc::InvalidArgument, "split policy must be auto, auto:H or fixed:J, got '" + text + "'");
}

const std::map<std::string, PriceColumn> kColumns{{"open", PriceColumn::Open},
                                                  {"high", PriceColumn::High},
                                                  {"low", PriceColumn::Low},
                                                  {"close", PriceColumn::Close},
                                                  {"adjclose", PriceColumn::AdjClose}};

std::optional<PriceColumn> column_option(const std::string& name) {
    if (name.empty() || name == "auto") {
        return std::nullopt;
    }
    return kColumns.at(name);
}

TimeSeries read_series(const std::string& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot open '" + path + "'");
    }
    auto series = parse_ohlcv_csv(in, column_option(column), std::filesystem::path(path).stem().string());
    if (series.dropped_rows() > 0) {
        spdlog::warn("{}: {} rows dropped while parsing", path, series.dropped_rows());
    }
    return series;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) {
        throw Error(Errc::Io, "cannot write '" + out_path + "'");
    }
    spdlog::info("wrote {}", out_path);
}

struct AnalyzeArgs {
    std::vector<std::string> inputs;
    std::string column = "auto";
    std::string mode = "full";
    double trim = 0.15;
    std::string lags = "tsig";
    double sd = 0.2;
    std::size_t max_sift = 100;
    std::size_t max_imfs = 0;
    std::string split = "auto";
    bool paper_repro = false;
    bool anis_lloyd = false;
    bool nv_residue = false;
    std::string out = "out";
    std::string format = "both";
    std::size_t min_length = 256;
    std::size_t jobs = 0;
};

int run_analyze(const AnalyzeArgs& args) {
    PipelineConfig config;
    for (const auto& in : args.inputs) {
        config.inputs.emplace_back(in);
    }
    config.column = column_option(args.column);
    config.mode = args.mode == "nobreak" ? PipelineMode::NoBreak : PipelineMode::Full;
    config.trim = args.trim;
    config.lag_policy = parse_lag_policy(args.lags);
    config.emd.sd_threshold = args.sd;
    config.emd.max_sift_iters = args.max_sift;
    if (args.max_imfs > 0) {
        config.emd.max_imfs = args.max_imfs;
    }
    config.split_policy = parse_split_policy(args.split);
    config.paper_repro = args.paper_repro;
    config.hurst.anis_lloyd = args.anis_lloyd;
    config.nv_include_residue = args.nv_residue;
    config.output_dir = args.out;
    config.format = args.format == "json" ? OutputFormat::Json : args.format == "csv" ? OutputFormat::Csv
                                                                                      : OutputFormat::Both;
    config.min_analysis_length = args.min_length;
    config.jobs = args.jobs;
    validate(config);

    const auto result = run_pipeline(config);
    for (const auto& input : result.inputs) {
        for (const auto& w : input.warnings) {
            spdlog::warn("{}: {}", input.input.string(), w);
        }
        if (input.parse_failed) {
            spdlog::error("{}: {}", input.input.string(), input.error);
            continue;
        }
        for (const auto& kind : input.kinds) {
            if (kind.status == StageStatus::Failed) {
                spdlog::error("{} [{}]: {}", input.input.string(), to_string(kind.kind), kind.message);
            } else if (kind.status == StageStatus::Written) {
                spdlog::info("{} [{}]: {} files in {}", input.input.string(), to_string(kind.kind), kind.files.size(),
                             input.output_dir.string());
            }
        }
    }
    return result.exit_code();
}

struct SynthArgs {
    std::string kind = "white";
    std::size_t n = 1024;
    std::uint64_t seed = 0;
    double h = 0.5;
    double period = 20.0;
    double f0 = 0.01;
    double f1 = 0.1;
    double break_frac = 0.5;
    double level_shift = 0.0;
    double slope_shift = 0.0;
    double noise_sd = 1.0;
    double base_slope = 0.0;
    std::string out;
};

int run_synth(const SynthArgs& args) {
    SynthSpec spec;
    spec.n = args.n;
    spec.seed = args.seed;
    if (args.kind == "white") {
        spec.kind = synth::WhiteNoise{};
    } else if (args.kind == "rw") {
        spec.kind = synth::RandomWalk{};
    } else if (args.kind == "fbm") {
        spec.kind = synth::Fbm{args.h};
    } else if (args.kind == "broken") {
        spec.kind = synth::BrokenTrend{args.break_frac, args.level_shift, args.slope_shift, args.noise_sd,
                                       args.base_slope};
    } else if (args.kind == "tone") {
        spec.kind = synth::Tone{args.period};
    } else {
        spec.kind = synth::Chirp{args.f0, args.f1};
    }
    const auto series = generate(spec);
    std::ostringstream text;
    write_ohlcv_csv(text, series);
    emit(text.str(), args.out);
    spdlog::debug("generated {}", series.label());
    return 0;
}

struct ZaArgs {
    std::string input;
    std::string column = "auto";
    double trim = 0.15;
    std::string lags = "tsig";
    std::size_t mc_reps = 0;
    std::uint64_t mc_seed = 1;
    std::string out;
};

int run_zabreak(const ZaArgs& args) {
    const auto series = read_series(args.input, args.column);
    const auto result = za_test(series, args.trim, parse_lag_policy(args.lags));
    spdlog::info("{}: break at {} ({}), min t = {:.4f}, k = {}", args.input, result.break_index,
                 format_date(series.dates()[result.break_index]), result.min_tstat, result.k_used);
    auto j = to_json(result, &series);
    if (args.mc_reps > 0) {
        const auto cv = za_critical_values_mc(series.size(), args.mc_reps, args.mc_seed, args.trim);
        j["mc_critical_values"] = {{"p01", cv.p01}, {"p05", cv.p05}, {"p10", cv.p10}, {"reps", args.mc_reps}};
    }
    emit(j.dump(2) + "\n", args.out);
    return 0;
}

struct HurstArgs {
    std::string input;
    std::string column = "auto";
    std::vector<std::size_t> grid;
    bool anis_lloyd = false;
    bool diff = false;
    std::string out;
};

int run_hurst(const HurstArgs& args) {
    const auto series = read_series(args.input, args.column);
    std::vector<double> values(series.values().begin(), series.values().end());
    if (args.diff) {
        values = increments(values);
    }
    std::optional<std::vector<std::size_t>> grid;
    if (!args.grid.empty()) {
        grid = args.grid;
    }
    const auto est = hurst_exponent(values, grid, HurstOptions{args.anis_lloyd});
    Json j;
    j["label"] = series.label();
    j["n_points"] = values.size();
    j["differenced"] = args.diff;
    j["anis_lloyd"] = args.anis_lloyd;
    j.update(to_json(est));
    emit(j.dump(2) + "\n", args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("emdscale"));
    spdlog::set_pattern("[%l] %v");
    spdlog::cfg::load_env_levels();

    CLI::App app{"Multi-scale Hurst analysis of price series by empirical mode decomposition"};
    app.require_subcommand(1);
    const std::vector<std::string> columns{"auto", "open", "high", "low", "close", "adjclose"};

    AnalyzeArgs analyze;
    auto* cmd_analyze = app.add_subcommand("analyze", "Break test, decomposition and scale report per input file");
    cmd_analyze->add_option("-i,--input", analyze.inputs, "OHLCV CSV files")->required()->check(CLI::ExistingFile);
    cmd_analyze->add_option("--column", analyze.column, "Price column")->check(CLI::IsMember(columns));
    cmd_analyze->add_option("--mode", analyze.mode, "full or nobreak")->check(CLI::IsMember({"full", "nobreak"}));
    cmd_analyze->add_option("--trim", analyze.trim, "Break search trimming fraction");
    cmd_analyze->add_option("--lags", analyze.lags, "tsig, tsig:KMAX or fixed:K");
    cmd_analyze->add_option("--sd", analyze.sd, "Sifting SD threshold");
    cmd_analyze->add_option("--max-sift", analyze.max_sift, "Maximum sifting iterations per IMF");
    cmd_analyze->add_option("--max-imfs", analyze.max_imfs, "Maximum number of IMFs (0 = unbounded)");
    cmd_analyze->add_option("--split", analyze.split, "auto, auto:H or fixed:J");
    cmd_analyze->add_flag("--paper-repro", analyze.paper_repro, "Nine IMFs and a fixed split after IMF5");
    cmd_analyze->add_flag("--anis-lloyd", analyze.anis_lloyd, "Small-sample corrected R/S");
    cmd_analyze->add_flag("--nv-include-residue", analyze.nv_residue, "Count the residue in normalized variance");
    cmd_analyze->add_option("-o,--out", analyze.out, "Output directory");
    cmd_analyze->add_option("--format", analyze.format, "json, csv or both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    cmd_analyze->add_option("--min-length", analyze.min_length, "Skip series shorter than this");
    cmd_analyze->add_option("-j,--jobs", analyze.jobs, "Parallel inputs (0 = all cores)");

    SynthArgs synth_args;
    auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic series as OHLCV CSV");
    cmd_synth->add_option("--kind", synth_args.kind, "white, rw, fbm, broken, tone or chirp")
        ->check(CLI::IsMember({"white", "rw", "fbm", "broken", "tone", "chirp"}));
    cmd_synth->add_option("-n,--n", synth_args.n, "Length");
    cmd_synth->add_option("--seed", synth_args.seed, "Random seed");
    cmd_synth->add_option("--hurst", synth_args.h, "fBm Hurst index");
    cmd_synth->add_option("--period", synth_args.period, "Tone period in samples");
    cmd_synth->add_option("--f0", synth_args.f0, "Chirp start frequency (cycles/sample)");
    cmd_synth->add_option("--f1", synth_args.f1, "Chirp end frequency (cycles/sample)");
    cmd_synth->add_option("--break-frac", synth_args.break_frac, "Break position as a fraction of n");
    cmd_synth->add_option("--level-shift", synth_args.level_shift, "Level shift after the break");
    cmd_synth->add_option("--slope-shift", synth_args.slope_shift, "Slope change after the break");
    cmd_synth->add_option("--noise-sd", synth_args.noise_sd, "Noise standard deviation");
    cmd_synth->add_option("--base-slope", synth_args.base_slope, "Trend slope before the break");
    cmd_synth->add_option("-o,--out", synth_args.out, "Output file (stdout when omitted)");

    ZaArgs za;
    auto* cmd_za = app.add_subcommand("zabreak", "Endogenous structural break test, JSON on stdout");
    cmd_za->add_option("-i,--input", za.input, "OHLCV CSV file")->required()->check(CLI::ExistingFile);
    cmd_za->add_option("--column", za.column, "Price column")->check(CLI::IsMember(columns));
    cmd_za->add_option("--trim", za.trim, "Trimming fraction");
    cmd_za->add_option("--lags", za.lags, "tsig, tsig:KMAX or fixed:K");
    cmd_za->add_option("--mc-reps", za.mc_reps, "Also simulate finite-sample critical values");
    cmd_za->add_option("--mc-seed", za.mc_seed, "First seed of the simulation");
    cmd_za->add_option("-o,--out", za.out, "Output file (stdout when omitted)");

    HurstArgs hurst;
    auto* cmd_hurst = app.add_subcommand("hurst", "R/S Hurst exponent of one series, JSON on stdout");
    cmd_hurst->add_option("-i,--input", hurst.input, "OHLCV CSV file")->required()->check(CLI::ExistingFile);
    cmd_hurst->add_option("--column", hurst.column, "Price column")->check(CLI::IsMember(columns));
    cmd_hurst->add_option("--grid", hurst.grid, "Subperiod lengths (automatic grid when omitted)")->delimiter(',');
    cmd_hurst->add_flag("--anis-lloyd", hurst.anis_lloyd, "Small-sample corrected R/S");
    cmd_hurst->add_flag("--diff", hurst.diff, "Use first differences");
    cmd_hurst->add_option("-o,--out", hurst.out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (cmd_analyze->parsed()) {
            return run_analyze(analyze);
        }
        if (cmd_synth->parsed()) {
            return run_synth(synth_args);
        }
        if (cmd_za->parsed()) {
            return run_zabreak(za);
        }
        return run_hurst(hurst);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        const bool config = e.code() == Errc::InvalidArgument || e.code() == Errc::InvalidSpec;
        return config ? kConfigError : 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
