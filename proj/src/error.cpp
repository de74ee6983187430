#include "udae/error.hpp"

namespace udae {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidSegmentCount: return "InvalidSegmentCount";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonContiguousClasses: return "NonContiguousClasses";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadNoiseFraction: return "BadNoiseFraction";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::LossActivationMismatch: return "LossActivationMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::SegmentCoverageError: return "SegmentCoverageError";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::ConvergenceError: return "ConvergenceError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace udae
