#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snewton {

enum class ErrorKind {
    InvalidArgument,
    StepSizeUnderflow,
    ScanExhausted,
    InconsistentVerdict,
    TailTooShort,
    RangeMismatch,
    OutOfRange,
    TailNotDecayed,
    ParseError,
};

inline std::string_view to_string(ErrorKind k)
{
    switch (k) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorKind::ScanExhausted: return "ScanExhausted";
        case ErrorKind::InconsistentVerdict: return "InconsistentVerdict";
        case ErrorKind::TailTooShort: return "TailTooShort";
        case ErrorKind::RangeMismatch: return "RangeMismatch";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::TailNotDecayed: return "TailNotDecayed";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated so the CLI can map it onto exit codes.
class Error : public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what)
        , kind_(kind)
        , detail_(what)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Same error with a context prefix, e.g. the ladder index that failed.
    Error with_context(const std::string& ctx) const { return Error(kind_, ctx + ": " + detail_); }

  private:
    ErrorKind kind_;
    std::string detail_;
};

inline void require(bool ok, ErrorKind kind, const std::string& msg)
{
    if (!ok) {
        throw Error(kind, msg);
    }
}

} // namespace snewton
