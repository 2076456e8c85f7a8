#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "bsuv/types.hpp"

namespace bsuv {

inline constexpr int kAde20kClasses = 150;
inline constexpr int kAde20kPerson = 12;

/// Per-pixel class distribution (H x W x K, class index fastest).
class ClassProbabilityField {
 public:
  static constexpr double kNormTolerance = 1e-6;

  /// Throws NormalizationViolation when a value leaves [0,1] or a pixel's
  /// distribution does not sum to 1 within kNormTolerance.
  ClassProbabilityField(int height, int width, int classes, std::vector<double> probs);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int classes() const noexcept { return classes_; }
  double at(int y, int x, int k) const {
    return probs_[(static_cast<std::size_t>(y) * width_ + x) * classes_ + k];
  }
  std::span<const double> data() const noexcept { return probs_; }

  friend bool operator==(const ClassProbabilityField&, const ClassProbabilityField&) = default;

 private:
  int height_, width_, classes_;
  std::vector<double> probs_;
};

/// Non-empty proper subset of class indices treated as foreground.
class ForegroundClassSet {
 public:
  ForegroundClassSet(std::vector<int> indices, int classes);

  std::span<const int> indices() const noexcept { return indices_; }
  int classes() const noexcept { return classes_; }
  ForegroundClassSet complement() const;

  /// person, car, cushion, box, book, boat, bus, truck, bottle, van, bag,
  /// bicycle in the 150-class ADE20K index space.
  static ForegroundClassSet ade20k_default();

 private:
  std::vector<int> indices_;
  int classes_;
};

/// FPM: per-pixel sum of the foreground-class probabilities.
ProbabilityMap compute_fpm(const ClassProbabilityField& field, const ForegroundClassSet& fg);

/// Thresholded FPM used directly as a background-subtraction result:
/// 1 iff fpm > theta.
BinaryMask fpm_threshold_bgs(const ProbabilityMap& fpm, double theta = 0.5);

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual ClassProbabilityField predict(const ColorFrame& frame) = 0;
  virtual int classes() const = 0;
};

/// Deterministic stand-in: luminance l = mean(R,G,B) goes to the person
/// class, (1 - l) / (K - 1) to every other class.
class StubSegmenter final : public Segmenter {
 public:
  explicit StubSegmenter(int classes = kAde20kClasses, int person_class = kAde20kPerson);
  ClassProbabilityField predict(const ColorFrame& frame) override;
  int classes() const override { return classes_; }

 private:
  int classes_;
  int person_;
};

/// Runs an external program once per frame:
///   <command> <input.png> <output.bin>
/// The program writes three little-endian uint32 (height, width, classes)
/// followed by height*width*classes float32 probabilities, class fastest.
/// Calls are serialized; external models are rarely reentrant.
class ExternalSegmenter final : public Segmenter {
 public:
  ExternalSegmenter(std::string command, int classes);
  ClassProbabilityField predict(const ColorFrame& frame) override;
  int classes() const override { return classes_; }

 private:
  std::string command_;
  int classes_;
  std::mutex mutex_;
  int calls_ = 0;
};

}  // namespace bsuv
