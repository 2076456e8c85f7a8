#include "bsuv/types.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

std::string to_string(Shape2 s) { return fmt::format("{}x{}", s.height, s.width); }

namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) {
    throw Error(Errc::ShapeMismatch, fmt::format("dimensions must be positive, got {}x{}", height, width));
  }
}

void check_size(std::size_t got, std::size_t want) {
  if (got != want) {
    throw Error(Errc::ShapeMismatch, fmt::format("expected {} values, got {}", want, got));
  }
}

void check_unit_interval(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(Errc::InvalidConfig, fmt::format("{} value {} outside [0,1]", what, v));
    }
  }
}

std::size_t area(int h, int w) { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }

}  // namespace

ColorFrame::ColorFrame(int height, int width, double fill) : shape_{height, width} {
  check_dims(height, width);
  data_.assign(area(height, width) * kChannels, fill);
  check_unit_interval(std::span<const double>(&fill, 1), "ColorFrame");
}

ColorFrame::ColorFrame(int height, int width, std::vector<double> data)
    : shape_{height, width}, data_(std::move(data)) {
  check_dims(height, width);
  check_size(data_.size(), area(height, width) * kChannels);
  check_unit_interval(data_, "ColorFrame");
}

ProbabilityMap::ProbabilityMap(int height, int width, double fill) : shape_{height, width} {
  check_dims(height, width);
  check_unit_interval(std::span<const double>(&fill, 1), "ProbabilityMap");
  data_.assign(area(height, width), fill);
}

ProbabilityMap::ProbabilityMap(int height, int width, std::vector<double> data)
    : shape_{height, width}, data_(std::move(data)) {
  check_dims(height, width);
  check_size(data_.size(), area(height, width));
  check_unit_interval(data_, "ProbabilityMap");
}

LabelMap::LabelMap(int height, int width, Label fill) : shape_{height, width} {
  check_dims(height, width);
  labels_.assign(area(height, width), fill);
}

LabelMap::LabelMap(int height, int width, std::vector<Label> labels)
    : shape_{height, width}, labels_(std::move(labels)) {
  check_dims(height, width);
  check_size(labels_.size(), area(height, width));
  for (Label l : labels_) {
    if (static_cast<int>(l) > static_cast<int>(Label::Foreground)) {
      throw Error(Errc::UnknownLabelValue, fmt::format("label ordinal {}", static_cast<int>(l)));
    }
  }
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill) : shape_{height, width} {
  check_dims(height, width);
  if (fill > 1) throw Error(Errc::InvalidConfig, "binary mask fill must be 0 or 1");
  values_.assign(area(height, width), fill);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> values)
    : shape_{height, width}, values_(std::move(values)) {
  check_dims(height, width);
  check_size(values_.size(), area(height, width));
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw Error(Errc::InvalidConfig, "binary mask holds a value other than 0/1");
  }
}

NetworkInput::NetworkInput(int height, int width, std::vector<double> planes)
    : shape_{height, width}, planes_(std::move(planes)) {
  check_dims(height, width);
  check_size(planes_.size(), area(height, width) * kChannels);
  check_unit_interval(planes_, "NetworkInput");
}

NetworkInput NetworkInput::with_channels_zeroed(std::span<const int> channels) const {
  NetworkInput out = *this;
  const auto n = area(shape_.height, shape_.width);
  for (int c : channels) {
    if (c < 0 || c >= kChannels) throw Error(Errc::IndexOutOfRange, fmt::format("channel {}", c));
    std::fill_n(out.planes_.begin() + static_cast<std::ptrdiff_t>(c * n), n, 0.0);
  }
  return out;
}

void VideoDescriptor::validate() const {
  if (frame_count < 1) {
    throw Error(Errc::InvalidConfig, fmt::format("{}/{}: no frames", category, video));
  }
  if (!(1 <= temporal_roi.first && temporal_roi.first <= temporal_roi.last &&
        temporal_roi.last <= frame_count)) {
    throw Error(Errc::InvalidConfig,
                fmt::format("{}/{}: temporal ROI [{}, {}] invalid for {} frames", category, video,
                            temporal_roi.first, temporal_roi.last, frame_count));
  }
  if (const auto* manual = std::get_if<ManualFrameList>(&empty_background_policy)) {
    if (manual->frames.empty()) {
      throw Error(Errc::InvalidConfig, fmt::format("{}/{}: empty manual frame list", category, video));
    }
    for (int f : manual->frames) {
      if (f < 1 || f > frame_count) {
        throw Error(Errc::IndexOutOfRange, fmt::format("{}/{}: manual frame {}", category, video, f));
      }
    }
  }
}

}  // namespace bsuv
