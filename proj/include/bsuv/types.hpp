#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bsuv {

struct Shape2 {
  int height = 0;
  int width = 0;
  friend bool operator==(const Shape2&, const Shape2&) = default;
};

std::string to_string(Shape2 s);

/// RGB frame with interleaved (H x W x 3) double values in [0,1].
class ColorFrame {
 public:
  static constexpr int kChannels = 3;

  ColorFrame() = default;
  ColorFrame(int height, int width, double fill = 0.0);
  /// Takes ownership of interleaved data; throws ShapeMismatch or
  /// InvalidConfig if the size or value range is wrong.
  ColorFrame(int height, int width, std::vector<double> data);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2 shape() const noexcept { return shape_; }
  bool empty() const noexcept { return data_.empty(); }

  double at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * shape_.width + x) * kChannels + c];
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ColorFrame&, const ColorFrame&) = default;

 private:
  Shape2 shape_;
  std::vector<double> data_;
};

/// Single-channel map in [0,1]: foreground probability maps and network output.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(int height, int width, double fill = 0.0);
  ProbabilityMap(int height, int width, std::vector<double> data);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2 shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * shape_.width + x]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;

 private:
  Shape2 shape_;
  std::vector<double> data_;
};

enum class Label : std::uint8_t { Background, HardShadow, OutsideROI, UnknownMotion, Foreground };

/// Ground-truth categories; OutsideROI folds the spatial ROI into the map.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, Label fill = Label::Background);
  LabelMap(int height, int width, std::vector<Label> labels);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2 shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return labels_.size(); }

  Label at(int y, int x) const { return labels_[static_cast<std::size_t>(y) * shape_.width + x]; }
  Label operator[](std::size_t i) const { return labels_[i]; }
  std::span<const Label> data() const noexcept { return labels_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Shape2 shape_;
  std::vector<Label> labels_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 0);
  BinaryMask(int height, int width, std::vector<std::uint8_t> values);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2 shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::uint8_t at(int y, int x) const { return values_[static_cast<std::size_t>(y) * shape_.width + x]; }
  std::uint8_t operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::uint8_t> data() const noexcept { return values_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Shape2 shape_;
  std::vector<std::uint8_t> values_;
};

/// Input slots of the 12-channel stack. Each slot holds R, G, B, FPM.
enum class Slot : int { Current = 0, Recent = 1, Empty = 2 };

/// Channel layout of NetworkInput: slot-major, RGB then FPM within a slot.
struct ChannelOrder {
  static constexpr int kChannels = 12;
  static constexpr int kPerSlot = 4;
  static constexpr int rgb(Slot s, int c) { return static_cast<int>(s) * kPerSlot + c; }
  static constexpr int fpm(Slot s) { return static_cast<int>(s) * kPerSlot + 3; }
};

/// Planar (12 x H x W) network input, every value in [0,1].
class NetworkInput {
 public:
  static constexpr int kChannels = ChannelOrder::kChannels;

  NetworkInput() = default;
  NetworkInput(int height, int width, std::vector<double> planes);

  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }
  Shape2 shape() const noexcept { return shape_; }

  double at(int c, int y, int x) const {
    return planes_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }
  std::span<const double> plane(int c) const {
    const auto n = static_cast<std::size_t>(shape_.height) * shape_.width;
    return std::span<const double>(planes_).subspan(c * n, n);
  }
  std::span<const double> data() const noexcept { return planes_; }

  /// Copy with the listed channels set to zero (ablation of input slots).
  NetworkInput with_channels_zeroed(std::span<const int> channels) const;

  friend bool operator==(const NetworkInput&, const NetworkInput&) = default;

 private:
  Shape2 shape_;
  std::vector<double> planes_;
};

// Empty-background selection policies.
struct AutoFirst100 {};
struct ManualFrameList {
  std::vector<int> frames;  // 1-based
};
struct PtzPolicy {};
/// Median of every frame in the video (the automatic variant compared
/// against manual selection).
struct AllFrames {};
using EmptyBackgroundPolicy = std::variant<AutoFirst100, ManualFrameList, PtzPolicy, AllFrames>;

struct TemporalRoi {
  int first = 1;  // 1-based, inclusive
  int last = 1;
};

struct VideoDescriptor {
  std::string category;
  std::string video;
  int frame_count = 0;
  Shape2 resolution;
  TemporalRoi temporal_roi;
  EmptyBackgroundPolicy empty_background_policy = AutoFirst100{};

  /// Throws InvalidConfig when the ROI or policy invariants do not hold.
  void validate() const;
  bool is_ptz() const { return std::holds_alternative<PtzPolicy>(empty_background_policy); }
};

}  // namespace bsuv
