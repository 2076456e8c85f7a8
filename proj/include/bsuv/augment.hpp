#pragma once

#include <array>
#include <string>
#include <utility>

#include "bsuv/network.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

/// Global additive RGB change d[c] = I + I_c applied to every pixel.
struct IlluminationShift {
  std::array<double, 3> d{0.0, 0.0, 0.0};
};

/// Which input frames share an illumination draw.
enum class ShiftTopology {
  CurrentRecentShared,  // current and recent share one draw, empty gets its own
  EmptyOnly,            // only the empty reference is shifted
  AllIndependent,       // one draw per frame
};

ShiftTopology parse_topology(const std::string& name);
std::string to_string(ShiftTopology t);

struct AugmentationConfig {
  double sigma_shared = 0.1;    // std of I
  double sigma_channel = 0.04;  // std of each I_c
  double sigma_noise = 0.01;    // per-pixel Gaussian noise
  int crop_size = 224;
  ShiftTopology topology = ShiftTopology::CurrentRecentShared;

  void validate() const;
  friend bool operator==(const AugmentationConfig&, const AugmentationConfig&) = default;
};

IlluminationShift sample_illumination(Rng& rng, double sigma_shared = 0.1, double sigma_channel = 0.04);

struct SlotShifts {
  IlluminationShift current, recent, empty;
};
SlotShifts sample_slot_shifts(Rng& rng, const AugmentationConfig& config);

/// Adds d[c] to channel c, then clamps to [0,1].
ColorFrame apply_illumination(const ColorFrame& frame, const IlluminationShift& shift);

/// Adds i.i.d. N(0, sigma^2) per pixel and channel, then clamps to [0,1].
ColorFrame add_pixel_noise(const ColorFrame& frame, Rng& rng, double sigma = 0.01);

struct CropWindow {
  int y = 0, x = 0, size = 0;
};

/// Uniform top-left offset for a size x size window. Throws FrameTooSmall.
CropWindow sample_crop_window(Shape2 shape, int size, Rng& rng);

ColorFrame crop(const ColorFrame& frame, const CropWindow& w);
ProbabilityMap crop(const ProbabilityMap& map, const CropWindow& w);
LabelMap crop(const LabelMap& labels, const CropWindow& w);
NetworkInput crop(const NetworkInput& input, const CropWindow& w);

/// One window, applied to all 12 channels and the label map.
std::pair<NetworkInput, LabelMap> random_crop_joint(const NetworkInput& input, const LabelMap& labels, int size,
                                                    Rng& rng);

}  // namespace bsuv
