#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace epicast {

inline constexpr const char* kVersion = "0.1.0";

/// Placeholder token that marks where the encoded hospitalization series is
/// injected into the prompt's embedding sequence.
inline constexpr const char* kTimeSeriesToken = "<time-series-special-token>";

/// Error kinds raised across the library. Input/validation kinds map to CLI
/// exit code 2, everything else to exit code 1.
enum class Errc {
    MissingColumn,
    NonContiguousWeeks,
    NegativeValue,
    InvalidValue,
    RankNotPermutation,
    UnknownPolicyLevel,
    ProportionSumViolation,
    CoverageMismatch,
    InvalidConfig,
    ParseError,
    IoError,
    InsufficientHistory,
    FutureUnavailable,
    WindowTooShort,
    RankOutOfRange,
    EmptyCorpus,
    ShapeMismatch,
    IdOutOfRange,
    IndexOutOfRange,
    DimensionMismatch,
    NonFiniteLoss,
    EmptyStateSet,
    SingularSystem,
    LengthMismatch,
    EmptyInput,
    InvalidDistribution,
    MissingBundle,
    SplitLeakage,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonContiguousWeeks: return "NonContiguousWeeks";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::RankNotPermutation: return "RankNotPermutation";
    case Errc::UnknownPolicyLevel: return "UnknownPolicyLevel";
    case Errc::ProportionSumViolation: return "ProportionSumViolation";
    case Errc::CoverageMismatch: return "CoverageMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::FutureUnavailable: return "FutureUnavailable";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::RankOutOfRange: return "RankOutOfRange";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::IdOutOfRange: return "IdOutOfRange";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::EmptyStateSet: return "EmptyStateSet";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::MissingBundle: return "MissingBundle";
    case Errc::SplitLeakage: return "SplitLeakage";
    }
    return "Unknown";
}

/// True for errors caused by malformed user input (bad CSV, bad config).
inline bool is_input_error(Errc c) {
    switch (c) {
    case Errc::MissingColumn:
    case Errc::NonContiguousWeeks:
    case Errc::NegativeValue:
    case Errc::InvalidValue:
    case Errc::RankNotPermutation:
    case Errc::UnknownPolicyLevel:
    case Errc::ProportionSumViolation:
    case Errc::CoverageMismatch:
    case Errc::InvalidConfig:
    case Errc::ParseError:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

} // namespace epicast
