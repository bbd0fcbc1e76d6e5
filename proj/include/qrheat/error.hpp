// error.hpp — Error codes shared by all qrheat modules

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrheat {

enum class ErrorCode {
    CouplingOutOfRange,
    NonPositiveFrequency,
    InvalidBath,
    TruncationTooSmall,
    OverflowRisk,
    DimensionMismatch,
    SingularSolve,
    ConvergenceFailure,
    StepTooLarge,
    TruncationUnconverged,
    BothCurrentsZero,
    CutoffUnconverged,
    InvalidTemperature,
    TooFewPoints,
    ParseError,
    ValidationError,
    UnknownPreset,
    IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace qrheat
