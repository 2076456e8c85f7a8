#include "bsuv/error.hpp"

namespace bsuv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFrame: return "MissingFrame";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::UnknownLabelValue: return "UnknownLabelValue";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::NoEligibleFrames: return "NoEligibleFrames";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SegmenterUnavailable: return "SegmenterUnavailable";
    case Errc::NormalizationViolation: return "NormalizationViolation";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeNotPoolable: return "ShapeNotPoolable";
    case Errc::FrameTooSmall: return "FrameTooSmall";
    case Errc::NotEnoughLabeledFrames: return "NotEnoughLabeledFrames";
    case Errc::MissingBackground: return "MissingBackground";
    case Errc::MissingGroundTruth: return "MissingGroundTruth";
    case Errc::NoEvaluatedPixels: return "NoEvaluatedPixels";
    case Errc::EmptyCategory: return "EmptyCategory";
    case Errc::InconsistentTable: return "InconsistentTable";
    case Errc::MissingMask: return "MissingMask";
    case Errc::DuplicateTestAssignment: return "DuplicateTestAssignment";
    case Errc::UncoveredVideo: return "UncoveredVideo";
    case Errc::TrainTestOverlap: return "TrainTestOverlap";
    case Errc::CheckpointFormat: return "CheckpointFormat";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace bsuv
