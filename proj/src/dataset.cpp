#include "bsuv/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

fs::path video_dir(const fs::path& root, const VideoId& id) { return root / id.category / id.video; }

fs::path input_frame_path(const fs::path& root, const VideoId& id, int frame) {
  const fs::path dir = video_dir(root, id) / "input";
  fs::path jpg = dir / fmt::format("in{:06d}.jpg", frame);
  if (fs::exists(jpg)) return jpg;
  fs::path png = dir / fmt::format("in{:06d}.png", frame);
  return fs::exists(png) ? png : jpg;
}

fs::path ground_truth_path(const fs::path& root, const VideoId& id, int frame) {
  return video_dir(root, id) / "groundtruth" / fmt::format("gt{:06d}.png", frame);
}

std::vector<VideoId> list_videos(const fs::path& root) {
  std::vector<VideoId> out;
  if (!fs::is_directory(root)) return out;
  for (const auto& cat : fs::directory_iterator(root)) {
    if (!cat.is_directory()) continue;
    for (const auto& vid : fs::directory_iterator(cat.path())) {
      if (fs::is_directory(vid.path() / "input")) {
        out.push_back({cat.path().filename().string(), vid.path().filename().string()});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<int> read_ints(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::vector<int> values{std::istream_iterator<int>(in), std::istream_iterator<int>()};
  if (!in.eof()) throw Error(Errc::InvalidConfig, path.string() + ": expected whitespace-separated integers");
  return values;
}

}  // namespace

VideoDescriptor describe_video(const fs::path& root, const VideoId& id) {
  const fs::path dir = video_dir(root, id);
  const fs::path input = dir / "input";
  if (!fs::is_directory(input)) throw Error(Errc::MissingFrame, "no input directory in " + dir.string());

  static const std::regex kFrameName(R"(in(\d{6})\.(jpg|png))");
  std::set<int> indices;
  for (const auto& e : fs::directory_iterator(input)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, kFrameName)) indices.insert(std::stoi(m[1]));
  }
  if (indices.empty()) throw Error(Errc::MissingFrame, "no frames in " + input.string());
  int expected = 1;
  for (int i : indices) {
    if (i != expected) {
      throw Error(Errc::MissingFrame, fmt::format("{}/{}: frame {} missing", id.category, id.video, expected));
    }
    ++expected;
  }

  VideoDescriptor d;
  d.category = id.category;
  d.video = id.video;
  d.frame_count = static_cast<int>(indices.size());
  d.resolution = read_color_frame(input_frame_path(root, id, 1)).shape();
  d.temporal_roi = {1, d.frame_count};
  if (fs::exists(dir / "temporalROI.txt")) {
    auto roi = read_ints(dir / "temporalROI.txt");
    if (roi.size() != 2) throw Error(Errc::InvalidConfig, (dir / "temporalROI.txt").string() + ": need 2 integers");
    d.temporal_roi = {roi[0], roi[1]};
  }
  if (id.category == "PTZ") {
    d.empty_background_policy = PtzPolicy{};
  } else if (fs::exists(dir / "emptyFrames.txt")) {
    d.empty_background_policy = ManualFrameList{read_ints(dir / "emptyFrames.txt")};
  }
  d.validate();
  return d;
}

ColorFrame load_frame(const fs::path& root, const VideoDescriptor& video, int t) {
  if (t < 1 || t > video.frame_count) {
    throw Error(Errc::IndexOutOfRange, fmt::format("{}/{}: frame {}", video.category, video.video, t));
  }
  ColorFrame f = read_color_frame(input_frame_path(root, {video.category, video.video}, t));
  if (f.shape() != video.resolution) {
    throw Error(Errc::ShapeMismatch, fmt::format("{}/{}: frame {} is {}, video is {}", video.category, video.video,
                                                 t, to_string(f.shape()), to_string(video.resolution)));
  }
  return f;
}

std::vector<ColorFrame> load_video(const fs::path& root, const VideoDescriptor& video) {
  std::vector<ColorFrame> frames;
  frames.reserve(static_cast<std::size_t>(video.frame_count));
  for (int t = 1; t <= video.frame_count; ++t) frames.push_back(load_frame(root, video, t));
  return frames;
}

LabelMap load_ground_truth(const fs::path& root, const VideoDescriptor& video, int t) {
  const VideoId id{video.category, video.video};
  const fs::path gt_path = ground_truth_path(root, id, t);
  if (!fs::exists(gt_path)) {
    throw Error(Errc::MissingGroundTruth, fmt::format("{}/{}: {}", video.category, video.video, gt_path.string()));
  }
  GrayImage8 gt = read_gray8(gt_path);
  const fs::path roi_path = video_dir(root, id) / "ROI.bmp";
  if (fs::exists(roi_path)) {
    GrayImage8 roi = read_gray8(roi_path);
    if (roi.height != gt.height || roi.width != gt.width) {
      throw Error(Errc::ShapeMismatch, roi_path.string() + " does not match the ground truth size");
    }
    for (std::size_t i = 0; i < gt.pixels.size(); ++i) {
      if (roi.pixels[i] == 0) gt.pixels[i] = label_code::kOutsideRoi;
    }
  }
  return decode_label_map(gt);
}

}  // namespace bsuv
