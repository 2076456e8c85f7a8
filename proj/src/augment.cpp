#include "bsuv/augment.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

ShiftTopology parse_topology(const std::string& name) {
  if (name == "current_recent_shared") return ShiftTopology::CurrentRecentShared;
  if (name == "empty_only") return ShiftTopology::EmptyOnly;
  if (name == "all_independent") return ShiftTopology::AllIndependent;
  throw Error(Errc::InvalidConfig, "unknown shift topology '" + name + "'");
}

std::string to_string(ShiftTopology t) {
  switch (t) {
    case ShiftTopology::CurrentRecentShared: return "current_recent_shared";
    case ShiftTopology::EmptyOnly: return "empty_only";
    case ShiftTopology::AllIndependent: return "all_independent";
  }
  return "?";
}

void AugmentationConfig::validate() const {
  if (sigma_shared < 0 || sigma_channel < 0 || sigma_noise < 0) {
    throw Error(Errc::InvalidConfig, "augmentation standard deviations must be non-negative");
  }
  if (crop_size < 1) throw Error(Errc::InvalidConfig, "crop size must be positive");
}

IlluminationShift sample_illumination(Rng& rng, double sigma_shared, double sigma_channel) {
  std::normal_distribution<double> shared(0.0, sigma_shared);
  std::normal_distribution<double> channel(0.0, sigma_channel);
  const double global = sigma_shared > 0 ? shared(rng) : 0.0;
  IlluminationShift s;
  for (double& d : s.d) d = global + (sigma_channel > 0 ? channel(rng) : 0.0);
  return s;
}

SlotShifts sample_slot_shifts(Rng& rng, const AugmentationConfig& config) {
  auto draw = [&] { return sample_illumination(rng, config.sigma_shared, config.sigma_channel); };
  SlotShifts out;
  switch (config.topology) {
    case ShiftTopology::CurrentRecentShared:
      out.current = draw();
      out.recent = out.current;
      out.empty = draw();
      break;
    case ShiftTopology::EmptyOnly:
      out.empty = draw();
      break;
    case ShiftTopology::AllIndependent:
      out.current = draw();
      out.recent = draw();
      out.empty = draw();
      break;
  }
  return out;
}

ColorFrame apply_illumination(const ColorFrame& frame, const IlluminationShift& shift) {
  const auto src = frame.data();
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = std::clamp(src[i] + shift.d[i % 3], 0.0, 1.0);
  return ColorFrame(frame.height(), frame.width(), std::move(out));
}

ColorFrame add_pixel_noise(const ColorFrame& frame, Rng& rng, double sigma) {
  if (sigma < 0) throw Error(Errc::InvalidConfig, "noise sigma must be non-negative");
  if (sigma == 0) return frame;
  std::normal_distribution<double> noise(0.0, sigma);
  const auto src = frame.data();
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = std::clamp(src[i] + noise(rng), 0.0, 1.0);
  return ColorFrame(frame.height(), frame.width(), std::move(out));
}

CropWindow sample_crop_window(Shape2 shape, int size, Rng& rng) {
  if (size < 1) throw Error(Errc::InvalidConfig, "crop size must be positive");
  if (shape.height < size || shape.width < size) {
    throw Error(Errc::FrameTooSmall, fmt::format("{} frame cannot hold a {}x{} crop", to_string(shape), size, size));
  }
  std::uniform_int_distribution<int> dy(0, shape.height - size), dx(0, shape.width - size);
  const int y = dy(rng);
  const int x = dx(rng);
  return {y, x, size};
}

namespace {

void check_window(Shape2 shape, const CropWindow& w) {
  if (w.y < 0 || w.x < 0 || w.y + w.size > shape.height || w.x + w.size > shape.width) {
    throw Error(Errc::FrameTooSmall, fmt::format("crop window outside {} frame", to_string(shape)));
  }
}

template <typename T, typename Get>
std::vector<T> crop_plane(const CropWindow& w, int channels, Get get) {
  std::vector<T> out(static_cast<std::size_t>(w.size) * w.size * channels);
  std::size_t i = 0;
  for (int y = 0; y < w.size; ++y)
    for (int x = 0; x < w.size; ++x)
      for (int c = 0; c < channels; ++c) out[i++] = get(w.y + y, w.x + x, c);
  return out;
}

}  // namespace

ColorFrame crop(const ColorFrame& frame, const CropWindow& w) {
  check_window(frame.shape(), w);
  return ColorFrame(w.size, w.size,
                    crop_plane<double>(w, 3, [&](int y, int x, int c) { return frame.at(y, x, c); }));
}

ProbabilityMap crop(const ProbabilityMap& map, const CropWindow& w) {
  check_window(map.shape(), w);
  return ProbabilityMap(w.size, w.size, crop_plane<double>(w, 1, [&](int y, int x, int) { return map.at(y, x); }));
}

LabelMap crop(const LabelMap& labels, const CropWindow& w) {
  check_window(labels.shape(), w);
  return LabelMap(w.size, w.size, crop_plane<Label>(w, 1, [&](int y, int x, int) { return labels.at(y, x); }));
}

NetworkInput crop(const NetworkInput& input, const CropWindow& w) {
  check_window(input.shape(), w);
  std::vector<double> planes(static_cast<std::size_t>(w.size) * w.size * NetworkInput::kChannels);
  std::size_t i = 0;
  for (int c = 0; c < NetworkInput::kChannels; ++c)
    for (int y = 0; y < w.size; ++y)
      for (int x = 0; x < w.size; ++x) planes[i++] = input.at(c, w.y + y, w.x + x);
  return NetworkInput(w.size, w.size, std::move(planes));
}

std::pair<NetworkInput, LabelMap> random_crop_joint(const NetworkInput& input, const LabelMap& labels, int size,
                                                    Rng& rng) {
  if (input.shape() != labels.shape()) throw Error(Errc::ShapeMismatch, "input and label map differ in shape");
  const CropWindow w = sample_crop_window(input.shape(), size, rng);
  return {crop(input, w), crop(labels, w)};
}

}  // namespace bsuv
