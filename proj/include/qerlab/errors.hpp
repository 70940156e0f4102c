#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qerlab {

/// Machine-readable error categories. The CLI prints `kind_name(kind)` in
/// its single-line error JSON.
enum class ErrorKind {
    CornerQuery,
    NoHit,
    CoincidentPoints,
    UnderResolved,
    NormalizationMismatch,
    TooCloseToBoundary,
    ClearanceViolation,
    OpenCurve,
    SupportTooCloseToEndpoint,
    DegenerateSampling,
    ZeroTrace,
    InvalidConfig,
    CacheMismatch,
    InvalidArgument,
    Io,
};

constexpr std::string_view kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::CornerQuery: return "CornerQuery";
        case ErrorKind::NoHit: return "NoHit";
        case ErrorKind::CoincidentPoints: return "CoincidentPoints";
        case ErrorKind::UnderResolved: return "UnderResolved";
        case ErrorKind::NormalizationMismatch: return "NormalizationMismatch";
        case ErrorKind::TooCloseToBoundary: return "TooCloseToBoundary";
        case ErrorKind::ClearanceViolation: return "ClearanceViolation";
        case ErrorKind::OpenCurve: return "OpenCurve";
        case ErrorKind::SupportTooCloseToEndpoint: return "SupportTooCloseToEndpoint";
        case ErrorKind::DegenerateSampling: return "DegenerateSampling";
        case ErrorKind::ZeroTrace: return "ZeroTrace";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::CacheMismatch: return "CacheMismatch";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace qerlab
