#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gf {

enum class ErrorKind {
  MissingFile,
  SchemaViolation,
  DuplicateVideoId,
  DanglingReference,
  MalformedLine,
  NonMonotonicFrames,
  WrongLandmarkCount,
  SidecarMismatch,
  NonFiniteValue,
  EmptyInput,
  TooShort,
  ZeroTimeStep,
  DegenerateSegment,
  BinMismatch,
  TooFewRows,
  NotSymmetric,
  TooIndefinite,
  DimensionMismatch,
  UnmappedId,
  ZeroVector,
  EmptyFrames,
  NoHandFrames,
  UnlabeledId,
  PerplexityTooHigh,
  TooFewPoints,
  MissingPlaceholder,
  EmptyBlock,
  InvalidCondition,
  MissingFrameRef,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure in the library is reported through this type; `kind` is the
// machine-checkable part, `what()` carries "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace gf
