#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace udae {

enum class ErrorCode {
    BadHeader,
    SizeMismatch,
    NonFinite,
    IndexOutOfRange,
    InvalidSegmentCount,
    BadShape,
    LengthMismatch,
    NonContiguousClasses,
    ShapeMismatch,
    BadNoiseFraction,
    DomainError,
    LossActivationMismatch,
    NonFiniteLoss,
    BadConfig,
    SegmentCoverageError,
    ClassTooSmall,
    EmptyTrainSet,
    LabelOutOfRange,
    DegenerateMatrix,
    EmptyMatrix,
    BadK,
    ConvergenceError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception; `code()` names
/// the failure class so callers and tests can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace udae
