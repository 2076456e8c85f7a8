#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsuv {

// Every failure the library reports carries one of these codes so callers
// (tests, the CLI exit-code mapper) can branch on the failure class.
enum class Errc {
  MissingFrame,
  CorruptImage,
  UnknownLabelValue,
  ShapeMismatch,
  EmptySequence,
  NoEligibleFrames,
  IndexOutOfRange,
  SegmenterUnavailable,
  NormalizationViolation,
  InvalidConfig,
  ShapeNotPoolable,
  FrameTooSmall,
  NotEnoughLabeledFrames,
  MissingBackground,
  MissingGroundTruth,
  NoEvaluatedPixels,
  EmptyCategory,
  InconsistentTable,
  MissingMask,
  DuplicateTestAssignment,
  UncoveredVideo,
  TrainTestOverlap,
  CheckpointFormat,
  NumericalFailure,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bsuv
