#pragma once

// JSON encoding of results. Field names are part of the external schema.

#include "emdscale/breaktest.hpp"
#include "emdscale/hurst.hpp"
#include "emdscale/scale_analysis.hpp"
#include "emdscale/series_io.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace emdscale {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T, typename F>
Json optional_json(const std::optional<T>& value, F&& encode) {
    return value ? encode(*value) : Json(nullptr);
}

template <typename T, typename F>
std::optional<T> optional_from(const Json& j, F&& decode) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return decode(j);
}

inline Json number(double v) { return Json(v); }
inline double as_number(const Json& j) { return j.get<double>(); }

}  // namespace detail

inline Json to_json(const HurstEstimate& est) {
    Json points = Json::array();
    for (const auto& p : est.points) {
        points.push_back({{"n", p.n}, {"rs", p.rs}});
    }
    return {{"h", est.h}, {"stderr", est.std_error}, {"intercept", est.intercept}, {"points", points}};
}

inline HurstEstimate hurst_from_json(const Json& j) {
    HurstEstimate est;
    est.h = j.at("h").get<double>();
    est.std_error = j.at("stderr").get<double>();
    est.intercept = j.at("intercept").get<double>();
    for (const auto& p : j.at("points")) {
        est.points.push_back({p.at("n").get<std::size_t>(), p.at("rs").get<double>()});
    }
    return est;
}

/// With `series`, the break date and per-candidate dates are included.
inline Json to_json(const BreakTestResult& result, const TimeSeries* series = nullptr) {
    Json curve = Json::array();
    for (const auto& c : result.candidate_tstats) {
        curve.push_back({{"t_b", c.t_b}, {"tstat", c.tstat}});
    }
    Json j;
    j["break_index"] = result.break_index;
    if (series != nullptr && result.break_index < series->size()) {
        j["break_date"] = format_date(series->dates()[result.break_index]);
    }
    j["min_tstat"] = result.min_tstat;
    j["k_used"] = result.k_used;
    j["trim"] = result.trim;
    j["critical_values"] = {{"p01", result.critical_values.p01},
                            {"p05", result.critical_values.p05},
                            {"p10", result.critical_values.p10}};
    j["reject_unit_root"] = {{"p01", result.reject_unit_root.p01},
                             {"p05", result.reject_unit_root.p05},
                             {"p10", result.reject_unit_root.p10}};
    j["candidate_tstats"] = curve;
    return j;
}

inline BreakTestResult break_from_json(const Json& j) {
    BreakTestResult r;
    r.break_index = j.at("break_index").get<std::size_t>();
    r.min_tstat = j.at("min_tstat").get<double>();
    r.k_used = j.at("k_used").get<std::size_t>();
    r.trim = j.at("trim").get<double>();
    const auto& cv = j.at("critical_values");
    r.critical_values = {cv.at("p01").get<double>(), cv.at("p05").get<double>(), cv.at("p10").get<double>()};
    const auto& rej = j.at("reject_unit_root");
    r.reject_unit_root = {rej.at("p01").get<bool>(), rej.at("p05").get<bool>(), rej.at("p10").get<bool>()};
    for (const auto& c : j.at("candidate_tstats")) {
        r.candidate_tstats.push_back({c.at("t_b").get<std::size_t>(), c.at("tstat").get<double>()});
    }
    return r;
}

inline Json to_json(const ScaleReport& report) {
    auto hurst = [](const HurstEstimate& e) { return to_json(e); };
    Json rows = Json::array();
    for (const auto& row : report.per_imf) {
        Json r;
        r["index"] = row.index;
        r["tau_days"] = detail::optional_json(row.tau_days, detail::number);
        r["tau_zero_crossing_days"] = detail::optional_json(row.tau_zero_crossing_days, detail::number);
        r["h"] = row.hurst ? Json(row.hurst->h) : Json(nullptr);
        r["h_stderr"] = row.hurst ? Json(row.hurst->std_error) : Json(nullptr);
        r["nv"] = row.nv;
        r["sift_iterations"] = row.sift_iterations;
        r["hurst"] = detail::optional_json(row.hurst, hurst);
        rows.push_back(std::move(r));
    }
    Json j;
    j["label"] = report.label;
    j["series_kind"] = std::string(to_string(report.series_kind));
    j["n_points"] = report.n_points;
    j["n_imfs"] = report.per_imf.size();
    j["per_imf"] = rows;
    j["split_index"] = report.split_index;
    j["split_status"] = std::string(to_string(report.split_status));
    j["short_term_tau_days"] = detail::optional_json(report.short_term_tau_days, detail::number);
    j["h_st"] = detail::optional_json(report.h_st, hurst);
    j["h_lt"] = detail::optional_json(report.h_lt, hurst);
    j["h_residue"] = detail::optional_json(report.h_residue, hurst);
    j["nv_residue"] = detail::optional_json(report.nv_residue, detail::number);
    j["break_info"] =
        detail::optional_json(report.break_info, [](const BreakTestResult& b) { return to_json(b); });
    return j;
}

inline ScaleReport report_from_json(const Json& j) {
    ScaleReport report;
    report.label = j.at("label").get<std::string>();
    const auto kind = j.at("series_kind").get<std::string>();
    report.series_kind = kind == "TSB" ? SeriesKind::TSB : kind == "TSA" ? SeriesKind::TSA : SeriesKind::TSO;
    report.n_points = j.at("n_points").get<std::size_t>();
    for (const auto& r : j.at("per_imf")) {
        ImfScale row;
        row.index = r.at("index").get<std::size_t>();
        row.tau_days = detail::optional_from<double>(r.at("tau_days"), detail::as_number);
        row.tau_zero_crossing_days = detail::optional_from<double>(r.at("tau_zero_crossing_days"), detail::as_number);
        row.nv = r.at("nv").get<double>();
        row.sift_iterations = r.at("sift_iterations").get<std::size_t>();
        row.hurst = detail::optional_from<HurstEstimate>(r.at("hurst"), hurst_from_json);
        report.per_imf.push_back(std::move(row));
    }
    report.split_index = j.at("split_index").get<std::size_t>();
    const auto status = j.at("split_status").get<std::string>();
    report.split_status = status == to_string(SplitStatus::NoSplitAllShortTerm)  ? SplitStatus::NoSplitAllShortTerm
                          : status == to_string(SplitStatus::NoSplitAllLongTerm) ? SplitStatus::NoSplitAllLongTerm
                                                                                 : SplitStatus::Split;
    report.short_term_tau_days = detail::optional_from<double>(j.at("short_term_tau_days"), detail::as_number);
    report.h_st = detail::optional_from<HurstEstimate>(j.at("h_st"), hurst_from_json);
    report.h_lt = detail::optional_from<HurstEstimate>(j.at("h_lt"), hurst_from_json);
    report.h_residue = detail::optional_from<HurstEstimate>(j.at("h_residue"), hurst_from_json);
    report.nv_residue = detail::optional_from<double>(j.at("nv_residue"), detail::as_number);
    report.break_info = detail::optional_from<BreakTestResult>(j.at("break_info"), break_from_json);
    return report;
}

}  // namespace emdscale
