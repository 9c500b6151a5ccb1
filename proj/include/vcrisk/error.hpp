#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcrisk {

enum class Errc {
    UnknownGroup,
    KindMismatch,
    DegenerateLoading,
    CalibrationInfeasible,
    NonPositiveRhoBar,
    OutOfRange,
    DimensionMismatch,
    NotPSD,
    InvalidLoading,
    InvalidConfig,
    ParseError,
    NonPositivePrice,
    InsufficientData,
    MissingTicker,
    ZeroVariance,
    InvalidComposition,
    InvalidRules,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries a machine-readable code; the
// CLI maps them to exit status 2 and the service to HTTP 400/422.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace vcrisk
