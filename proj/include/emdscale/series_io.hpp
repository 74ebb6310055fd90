#pragma once

#include "emdscale/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emdscale {

using Date = std::chrono::sys_days;

enum class PriceColumn { Open, High, Low, Close, AdjClose };

/// Header names as they appear in Yahoo-style exports.
constexpr std::string_view column_header(PriceColumn column) noexcept {
    switch (column) {
    case PriceColumn::Open: return "Open";
    case PriceColumn::High: return "High";
    case PriceColumn::Low: return "Low";
    case PriceColumn::Close: return "Close";
    case PriceColumn::AdjClose: return "Adj Close";
    }
    return "Close";
}

/**
 * Uniformly indexed daily series. The time axis is the trading-day index
 * t = 0, 1, ..., so dt is always one day; calendar dates are kept only as
 * metadata.
 *
 * Invariants: at least two points, all values finite, dates strictly
 * increasing, one date per value.
 */
class TimeSeries {
public:
    TimeSeries(std::vector<double> values, std::vector<Date> dates, std::string label,
               std::size_t dropped_rows = 0)
        : values_(std::move(values)),
          dates_(std::move(dates)),
          label_(std::move(label)),
          dropped_rows_(dropped_rows) {
        detail::require(values_.size() == dates_.size(), Errc::InvalidArgument,
                        "values and dates differ in length");
        detail::require(values_.size() >= 2, Errc::TooShort, "a series needs at least two points");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            detail::require(std::isfinite(values_[i]), Errc::InvalidArgument,
                            "series values must be finite");
            if (i > 0) {
                detail::require(dates_[i - 1] < dates_[i], Errc::InvalidArgument,
                                "dates must be strictly increasing");
            }
        }
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<const Date> dates() const noexcept { return dates_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    /// Sampling interval in days.
    [[nodiscard]] static constexpr double dt() noexcept { return 1.0; }
    /// Rows discarded during parsing (missing or non-numeric values, duplicate dates).
    [[nodiscard]] std::size_t dropped_rows() const noexcept { return dropped_rows_; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> values_;
    std::vector<Date> dates_;
    std::string label_;
    std::size_t dropped_rows_ = 0;
};

inline std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// Parses `YYYY-MM-DD`; anything else (including impossible calendar days) is nullopt.
inline std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date{ymd};
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline std::string lowercase_alnum(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

/// Header lookup that ignores case, spaces and punctuation ("Adj Close" == "adj_close").
inline std::optional<std::size_t> find_header(std::span<const std::string_view> header,
                                              std::string_view name) {
    const auto wanted = lowercase_alnum(name);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (lowercase_alnum(header[i]) == wanted) {
            return i;
        }
    }
    return std::nullopt;
}

inline std::optional<double> parse_value(std::string_view field) {
    if (field.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

}  // namespace detail

/**
 * Reads a Yahoo-finance style CSV (`Date,Open,High,Low,Close,Adj Close,Volume`).
 *
 * With no column given, `Adj Close` is used when present and `Close`
 * otherwise. Rows whose selected value is missing, `null` or non-numeric are
 * dropped, as are repeated dates (first occurrence wins). The remaining rows
 * are sorted by date.
 */
inline TimeSeries parse_ohlcv_csv(std::istream& in, std::optional<PriceColumn> column = std::nullopt,
                                  std::string label = "series") {
    std::string line;
    while (std::getline(in, line) && detail::trim(line).empty()) {
    }
    const auto header = detail::split_csv_line(line);
    const auto date_col = detail::find_header(header, "Date");
    if (!date_col) {
        detail::fail(Errc::MissingColumn, "no Date column in header");
    }
    std::optional<std::size_t> value_col;
    if (column) {
        value_col = detail::find_header(header, column_header(*column));
        if (!value_col) {
            detail::fail(Errc::MissingColumn,
                         "no '" + std::string(column_header(*column)) + "' column in header");
        }
    } else {
        value_col = detail::find_header(header, column_header(PriceColumn::AdjClose));
        if (!value_col) {
            value_col = detail::find_header(header, column_header(PriceColumn::Close));
        }
        if (!value_col) {
            detail::fail(Errc::MissingColumn, "neither 'Adj Close' nor 'Close' in header");
        }
    }

    std::vector<std::pair<Date, double>> rows;
    std::size_t dropped = 0;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() <= std::max(*date_col, *value_col)) {
            ++dropped;
            continue;
        }
        const auto date = parse_iso_date(fields[*date_col]);
        if (!date) {
            detail::fail(Errc::UnparseableDate, "row " + std::to_string(row_number) + ": '" +
                                                    std::string(fields[*date_col]) + "'");
        }
        const auto value = detail::parse_value(fields[*value_col]);
        if (!value) {
            ++dropped;
            continue;
        }
        rows.emplace_back(*date, *value);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> values;
    std::vector<Date> dates;
    values.reserve(rows.size());
    dates.reserve(rows.size());
    for (const auto& [date, value] : rows) {
        if (!dates.empty() && dates.back() == date) {
            ++dropped;
            continue;
        }
        dates.push_back(date);
        values.push_back(value);
    }
    if (values.size() < 2) {
        detail::fail(Errc::NoValidRows, "fewer than two usable rows");
    }
    return TimeSeries(std::move(values), std::move(dates), std::move(label), dropped);
}

inline TimeSeries parse_ohlcv_csv(std::string_view text, std::optional<PriceColumn> column = std::nullopt,
                                  std::string label = "series") {
    std::istringstream in{std::string(text)};
    return parse_ohlcv_csv(in, column, std::move(label));
}

/// Writes the series in the same schema `parse_ohlcv_csv` reads; every price column holds the value.
inline void write_ohlcv_csv(std::ostream& out, const TimeSeries& series) {
    out << "Date,Open,High,Low,Close,Adj Close,Volume\n";
    const auto values = series.values();
    const auto dates = series.dates();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto v = format_double(values[i]);
        out << format_date(dates[i]) << ',' << v << ',' << v << ',' << v << ',' << v << ',' << v
            << ",0\n";
    }
}

/// Contiguous sub-series [start, end).
inline TimeSeries slice(const TimeSeries& series, std::size_t start, std::size_t end) {
    if (!(start < end && end <= series.size())) {
        detail::fail(Errc::OutOfRange, "slice [" + std::to_string(start) + ", " + std::to_string(end) +
                                           ") of a series of length " + std::to_string(series.size()));
    }
    const auto values = series.values().subspan(start, end - start);
    const auto dates = series.dates().subspan(start, end - start);
    return TimeSeries({values.begin(), values.end()}, {dates.begin(), dates.end()},
                      series.label() + "[" + std::to_string(start) + ":" + std::to_string(end) + ")");
}

/// Consecutive weekdays starting at `first`, used to date synthetic series.
inline std::vector<Date> business_days(Date first, std::size_t count) {
    std::vector<Date> dates;
    dates.reserve(count);
    Date day = first;
    while (dates.size() < count) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
            dates.push_back(day);
        }
        day += std::chrono::days{1};
    }
    return dates;
}

}  // namespace emdscale
