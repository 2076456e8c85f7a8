#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "bsuv/config.hpp"
#include "bsuv/dataset.hpp"
#include "bsuv/network.hpp"
#include "bsuv/semantics.hpp"
#include "bsuv/training.hpp"

namespace bsuv {

namespace fs = std::filesystem;

// Cache layout under <cache>/<category>/<video>/:
//   empty.png, recent_%06d.png                 backgrounds (16-bit RGB)
//   recent100_%06d.png, recent30_%06d.png      PTZ: long and short windows
//   fpm_in%06d.png                             FPM of input frame t (16-bit gray)
//   fpm_empty.png, fpm_recent_%06d.png         FPMs of the backgrounds
//   fpm_recent100_%06d.png, fpm_recent30_%06d.png
// For PTZ the 100-frame window fills the empty slot and the 30-frame window
// the recent slot. The recent slot of frame 1 holds frame 1 itself.
class CacheLayout {
 public:
  explicit CacheLayout(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const noexcept { return root_; }
  fs::path dir(const VideoId& id) const { return root_ / id.category / id.video; }
  /// Background occupying `slot` (Recent or Empty) for frame t.
  fs::path background(const VideoDescriptor& v, Slot slot, int t) const;
  /// FPM of the frame occupying `slot` for frame t.
  fs::path fpm(const VideoDescriptor& v, Slot slot, int t) const;

 private:
  fs::path root_;
};

std::unique_ptr<Segmenter> make_segmenter(const SegmenterConfig& config);
ForegroundClassSet foreground_classes(const SegmenterConfig& config);

/// Policy actually used for a video: the descriptor's, except that
/// empty_background = "all_frames" replaces AutoFirst100.
EmptyBackgroundPolicy effective_policy(const RunConfig& config, const VideoDescriptor& video);

/// Frames among the first 100 whose FPM marks at most `max_fraction` of the
/// pixels (FPM > 0.5) as foreground.
std::vector<int> foreground_free_frames(std::span<const ProbabilityMap> fpms, double max_fraction);

struct CacheStats {
  int written = 0;
  int skipped = 0;
};

/// Writes every background file of one video that is not already cached.
/// Throws NoEligibleFrames with a hint to supply emptyFrames.txt.
CacheStats compute_backgrounds(const RunConfig& config, const VideoDescriptor& video, Segmenter& segmenter);

/// Writes every FPM file of one video that is not already cached. Requires
/// the backgrounds (MissingBackground otherwise).
CacheStats compute_fpms(const RunConfig& config, const VideoDescriptor& video, Segmenter& segmenter);

/// Frame t with its cached references, FPMs and ground truth. Throws
/// MissingBackground, MissingGroundTruth.
TrainingExample load_example(const RunConfig& config, const VideoDescriptor& video, int t, bool with_labels = true);

/// Network input for frame t from the cache (no augmentation).
NetworkInput load_input(const RunConfig& config, const VideoDescriptor& video, int t);

class CachedSource final : public ExampleSource {
 public:
  struct Item {
    std::size_t video = 0;  // index into videos()
    int frame = 0;
  };
  CachedSource(RunConfig config, std::vector<VideoDescriptor> videos, std::vector<Item> items);

  /// frames_per_video frames per video through select_training_frames.
  static CachedSource for_training(const RunConfig& config, const std::vector<VideoDescriptor>& videos);

  std::size_t size() const override { return items_.size(); }
  TrainingExample load(std::size_t index) const override;
  const std::vector<Item>& items() const noexcept { return items_; }
  const std::vector<VideoDescriptor>& videos() const noexcept { return videos_; }

 private:
  RunConfig config_;
  std::vector<VideoDescriptor> videos_;
  std::vector<Item> items_;
};

/// Full-resolution probability map: pads to the network multiple, predicts in
/// evaluation mode, crops the padding away.
ProbabilityMap predict_full(const SegmentationNet& net, const NetworkInput& input);

/// One bin%06d.png per frame of the temporal ROI under <out>/<cat>/<video>/.
/// Returns the number of masks written.
int infer_video(const SegmentationNet& net, const RunConfig& config, const VideoDescriptor& video,
                const fs::path& masks_dir);

}  // namespace bsuv
