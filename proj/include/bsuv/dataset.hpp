#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bsuv/image_io.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

// Dataset layout:
//   <root>/<category>/<video>/input/in%06d.jpg   (in%06d.png also accepted)
//   <root>/<category>/<video>/groundtruth/gt%06d.png
//   <root>/<category>/<video>/ROI.bmp            (optional; 0 = outside ROI)
//   <root>/<category>/<video>/temporalROI.txt    (optional; "first last")
//   <root>/<category>/<video>/emptyFrames.txt    (optional manual empty-frame list)
struct VideoId {
  std::string category;
  std::string video;
  friend auto operator<=>(const VideoId&, const VideoId&) = default;
};

fs::path video_dir(const fs::path& root, const VideoId& id);
fs::path input_frame_path(const fs::path& root, const VideoId& id, int frame);
fs::path ground_truth_path(const fs::path& root, const VideoId& id, int frame);

/// All <category>/<video> directories under root that contain an input/ folder.
std::vector<VideoId> list_videos(const fs::path& root);

/// Scans the video directory. PTZ policy when the category is "PTZ", manual
/// policy when emptyFrames.txt exists, AutoFirst100 otherwise. Throws
/// MissingFrame on a gap in the numbered input sequence.
VideoDescriptor describe_video(const fs::path& root, const VideoId& id);

/// Frame t (1-based) scaled to [0,1].
ColorFrame load_frame(const fs::path& root, const VideoDescriptor& video, int t);

/// Every frame, in temporal order.
std::vector<ColorFrame> load_video(const fs::path& root, const VideoDescriptor& video);

/// Ground truth of frame t with ROI.bmp folded in as OutsideROI.
/// Throws MissingGroundTruth when the file does not exist.
LabelMap load_ground_truth(const fs::path& root, const VideoDescriptor& video, int t);

}  // namespace bsuv
