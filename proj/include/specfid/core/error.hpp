#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specfid {

enum class ErrorCode {
    EmptyCurve,
    InvalidConfig,
    CurveTooShort,
    TooFewPoints,
    NonMonotonicX,
    OutOfDomain,
    EmptySet,
    LengthMismatch,
    NonFiniteCost,
    NoSubplotFound,
    EmptyAnswer,
    InvalidSpec,
    ExhaustedRetries,
    JudgeUnavailable,
    MalformedVerdict,
    InvalidInput,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::CurveTooShort: return "CurveTooShort";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NonMonotonicX: return "NonMonotonicX";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteCost: return "NonFiniteCost";
    case ErrorCode::NoSubplotFound: return "NoSubplotFound";
    case ErrorCode::EmptyAnswer: return "EmptyAnswer";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::MalformedVerdict: return "MalformedVerdict";
    case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

/// Library-wide exception. Every failure carries a stable code so callers
/// (notably the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace specfid
