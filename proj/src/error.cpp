#include "gesture_fidelity/error.hpp"

namespace gf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::DuplicateVideoId: return "DuplicateVideoId";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::NonMonotonicFrames: return "NonMonotonicFrames";
    case ErrorKind::WrongLandmarkCount: return "WrongLandmarkCount";
    case ErrorKind::SidecarMismatch: return "SidecarMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::ZeroTimeStep: return "ZeroTimeStep";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::TooIndefinite: return "TooIndefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnmappedId: return "UnmappedId";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyFrames: return "EmptyFrames";
    case ErrorKind::NoHandFrames: return "NoHandFrames";
    case ErrorKind::UnlabeledId: return "UnlabeledId";
    case ErrorKind::PerplexityTooHigh: return "PerplexityTooHigh";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorKind::EmptyBlock: return "EmptyBlock";
    case ErrorKind::InvalidCondition: return "InvalidCondition";
    case ErrorKind::MissingFrameRef: return "MissingFrameRef";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

}  // namespace gf
