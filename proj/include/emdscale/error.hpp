#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emdscale {

/// Failure categories shared by every module. Callers branch on the code;
/// the message carries the human-readable detail.
enum class Errc {
    InvalidArgument,
    MissingColumn,
    NoValidRows,
    UnparseableDate,
    OutOfRange,
    TooShort,
    InsufficientAnchors,
    NoOscillation,
    IndexOutOfRange,
    DegenerateSeries,
    RankDeficient,
    AllRankDeficient,
    AllZeroImfs,
    InconsistentInputs,
    InvalidSpec,
    Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NoValidRows: return "NoValidRows";
    case Errc::UnparseableDate: return "UnparseableDate";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TooShort: return "TooShort";
    case Errc::InsufficientAnchors: return "InsufficientAnchors";
    case Errc::NoOscillation: return "NoOscillation";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::AllRankDeficient: return "AllRankDeficient";
    case Errc::AllZeroImfs: return "AllZeroImfs";
    case Errc::InconsistentInputs: return "InconsistentInputs";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

namespace detail {

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const char* what) {
    if (!condition) {
        fail(code, what);
    }
}

}  // namespace detail

}  // namespace emdscale
