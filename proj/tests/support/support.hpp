#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bsuv/error.hpp"
#include "bsuv/network.hpp"
#include "bsuv/types.hpp"

namespace bsuv::testing {

namespace fs = std::filesystem;

/// Code of the bsuv::Error thrown by f, or nullopt when it returns normally.
template <typename F>
std::optional<Errc> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "bsuv");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

ColorFrame random_frame(int h, int w, Rng& rng);
ProbabilityMap random_probability(int h, int w, Rng& rng);
BinaryMask random_mask(int h, int w, Rng& rng, double p = 0.5);
/// Labels drawn from all five classes.
LabelMap random_labels(int h, int w, Rng& rng);
NetworkInput random_input(int h, int w, Rng& rng);

enum class Backdrop { Static, HorizontalRamp, VerticalRamp };

struct SyntheticVideo {
  std::string category = "baseline";
  std::string video = "synthetic";
  int height = 60;
  int width = 80;
  int frames = 40;
  Backdrop backdrop = Backdrop::Static;
  std::array<double, 3> base{0.35, 0.45, 0.3};    // backdrop colour
  std::array<double, 3> object{0.9, 0.85, 0.2};   // moving square colour
  int square = 12;
  int first_object_frame = 11;  // frames before this are foreground-free
  int roi_first = 11;
  bool write_empty_frames = true;  // emptyFrames.txt listing 1..first_object_frame-1
  std::uint64_t seed = 1;
  double noise = 0.01;
};

/// Deterministic colour of the backdrop at (y, x).
std::array<double, 3> backdrop_colour(const SyntheticVideo& spec, int y, int x);
/// Top-left corner of the square in frame t (1-based), or {-1,-1} before it appears.
std::pair<int, int> square_position(const SyntheticVideo& spec, int t);

/// Writes input PNGs, ground truth, temporalROI.txt and (optionally)
/// emptyFrames.txt under root/category/video.
void write_synthetic_video(const fs::path& root, const SyntheticVideo& spec);

}  // namespace bsuv::testing

namespace bsuv::testing {

struct GradientSample {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;  // |a - n| / max(|a|, |n|)
  /// The ReLU or max-pool pattern differs between theta - step, theta and
  /// theta + step, so the central difference straddles a kink.
  bool crosses_kink = false;
};

/// Compares backprop against central differences of the mean relaxed Jaccard
/// loss for `count` randomly chosen trainable scalars. Training mode with a
/// fixed dropout draw and frozen running statistics. With skip_kinks, draws
/// until `count` samples away from kinks were found; the kinked ones are
/// returned as well.
std::vector<GradientSample> network_gradient_check(const NetworkConfig& config, std::uint64_t seed, int batch,
                                                   int height, int width, int count, double step,
                                                   bool skip_kinks = false);

}  // namespace bsuv::testing
