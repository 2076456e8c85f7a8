#include "bsuv/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>

#include <fmt/format.h>

#include "bsuv/background.hpp"
#include "bsuv/error.hpp"
#include "bsuv/image_io.hpp"
#include "bsuv/input.hpp"

namespace bsuv {

fs::path CacheLayout::background(const VideoDescriptor& v, Slot slot, int t) const {
  const fs::path d = dir({v.category, v.video});
  const bool ptz = v.is_ptz();
  switch (slot) {
    case Slot::Empty: return ptz ? d / fmt::format("recent100_{:06d}.png", t) : d / "empty.png";
    case Slot::Recent: return d / fmt::format("{}_{:06d}.png", ptz ? "recent30" : "recent", t);
    case Slot::Current: break;
  }
  throw Error(Errc::InvalidConfig, "the current frame is not a cached background");
}

fs::path CacheLayout::fpm(const VideoDescriptor& v, Slot slot, int t) const {
  const fs::path d = dir({v.category, v.video});
  const bool ptz = v.is_ptz();
  switch (slot) {
    case Slot::Current: return d / fmt::format("fpm_in{:06d}.png", t);
    case Slot::Empty: return ptz ? d / fmt::format("fpm_recent100_{:06d}.png", t) : d / "fpm_empty.png";
    case Slot::Recent: return d / fmt::format("{}_{:06d}.png", ptz ? "fpm_recent30" : "fpm_recent", t);
  }
  return {};
}

std::unique_ptr<Segmenter> make_segmenter(const SegmenterConfig& config) {
  if (config.kind == "external") return std::make_unique<ExternalSegmenter>(config.command, config.classes);
  return std::make_unique<StubSegmenter>(config.classes);
}

ForegroundClassSet foreground_classes(const SegmenterConfig& config) {
  if (config.foreground_classes.empty()) {
    if (config.classes != kAde20kClasses) {
      throw Error(Errc::InvalidConfig, "segmenter.foreground_classes is required when classes != 150");
    }
    return ForegroundClassSet::ade20k_default();
  }
  return ForegroundClassSet(config.foreground_classes, config.classes);
}

EmptyBackgroundPolicy effective_policy(const RunConfig& config, const VideoDescriptor& video) {
  if (config.empty_background == "all_frames" && std::holds_alternative<AutoFirst100>(video.empty_background_policy)) {
    return AllFrames{};
  }
  return video.empty_background_policy;
}

std::vector<int> foreground_free_frames(std::span<const ProbabilityMap> fpms, double max_fraction) {
  std::vector<int> out;
  const int horizon = std::min<int>(kAutoEmptyHorizon, static_cast<int>(fpms.size()));
  for (int i = 0; i < horizon; ++i) {
    const auto& f = fpms[static_cast<std::size_t>(i)];
    const auto fg = std::count_if(f.data().begin(), f.data().end(), [](double p) { return p > 0.5; });
    if (static_cast<double>(fg) <= max_fraction * static_cast<double>(f.size())) out.push_back(i + 1);
  }
  return out;
}

namespace {

std::string name(const VideoDescriptor& v) { return v.category + "/" + v.video; }

ProbabilityMap frame_fpm(const RunConfig& config, const CacheLayout& cache, const VideoDescriptor& v, int t,
                         const ColorFrame& frame, Segmenter& segmenter, CacheStats* stats) {
  const fs::path p = cache.fpm(v, Slot::Current, t);
  if (fs::exists(p)) return read_probability16(p);
  ProbabilityMap fpm = compute_fpm(segmenter.predict(frame), foreground_classes(config.segmenter));
  write_probability16(p, fpm);
  if (stats) ++stats->written;
  // Read back so callers see the same quantized values a warm cache returns.
  return read_probability16(p);
}

ColorFrame build_empty(const RunConfig& config, const CacheLayout& cache, const VideoDescriptor& v,
                       Segmenter& segmenter) {
  const fs::path& root = config.dataset_root;
  const EmptyBackgroundPolicy policy = effective_policy(config, v);
  if (const auto* manual = std::get_if<ManualFrameList>(&policy)) {
    std::vector<ColorFrame> frames;
    std::vector<int> local;
    for (int t : manual->frames) {
      if (t < 1 || t > v.frame_count) {
        throw Error(Errc::IndexOutOfRange, fmt::format("{}: emptyFrames.txt names frame {} of {}", name(v), t,
                                                       v.frame_count));
      }
      frames.push_back(load_frame(root, v, t));
      local.push_back(static_cast<int>(frames.size()));
    }
    return empty_background(frames, ManualFrameList{local});
  }
  if (std::holds_alternative<AllFrames>(policy)) return empty_background(load_video(root, v), AllFrames{});

  const int horizon = std::min(kAutoEmptyHorizon, v.frame_count);
  std::vector<ColorFrame> frames;
  std::vector<ProbabilityMap> fpms;
  for (int t = 1; t <= horizon; ++t) {
    frames.push_back(load_frame(root, v, t));
    fpms.push_back(frame_fpm(config, cache, v, t, frames.back(), segmenter, nullptr));
  }
  const auto eligible = foreground_free_frames(fpms, config.empty_fg_fraction);
  try {
    return empty_background(frames, AutoFirst100{}, eligible);
  } catch (const Error& e) {
    if (e.code() != Errc::NoEligibleFrames) throw;
    throw Error(Errc::NoEligibleFrames,
                fmt::format("{}: no foreground-free frame among the first {}; list background-only frames in {}",
                            name(v), horizon, (video_dir(root, {v.category, v.video}) / "emptyFrames.txt").string()));
  }
}

}  // namespace

CacheStats compute_backgrounds(const RunConfig& config, const VideoDescriptor& v, Segmenter& segmenter) {
  const CacheLayout cache(config.cache_root);
  CacheStats stats;
  const int n = v.frame_count;

  if (!v.is_ptz()) {
    const fs::path p = cache.background(v, Slot::Empty, 1);
    if (fs::exists(p)) {
      ++stats.skipped;
    } else {
      write_color16(p, build_empty(config, cache, v, segmenter));
      ++stats.written;
    }
  }

  // Slot files that still need writing, per frame.
  std::vector<Slot> slots{Slot::Recent};
  if (v.is_ptz()) slots.push_back(Slot::Empty);
  bool any_missing = false;
  for (int t = 1; t <= n && !any_missing; ++t)
    for (Slot s : slots) any_missing |= !fs::exists(cache.background(v, s, t));
  if (!any_missing) {
    stats.skipped += n * static_cast<int>(slots.size());
    return stats;
  }

  RecentBackgroundStream recent(v.resolution, v.is_ptz() ? kPtzShortWindow : kRecentWindow);
  std::optional<RecentBackgroundStream> long_window;
  if (v.is_ptz()) long_window.emplace(v.resolution, kRecentWindow);
  for (int t = 1; t <= n; ++t) {
    const ColorFrame frame = load_frame(config.dataset_root, v, t);
    for (Slot s : slots) {
      const fs::path p = cache.background(v, s, t);
      if (fs::exists(p)) {
        ++stats.skipped;
        continue;
      }
      const RecentBackgroundStream& stream = s == Slot::Recent ? recent : *long_window;
      write_color16(p, t == 1 ? frame : stream.current());
      ++stats.written;
    }
    recent.push(frame);
    if (long_window) long_window->push(frame);
  }
  return stats;
}

CacheStats compute_fpms(const RunConfig& config, const VideoDescriptor& v, Segmenter& segmenter) {
  const CacheLayout cache(config.cache_root);
  const ForegroundClassSet fg = foreground_classes(config.segmenter);
  CacheStats stats;
  auto derive = [&](const fs::path& bg, const fs::path& out) {
    if (fs::exists(out)) {
      ++stats.skipped;
      return;
    }
    if (!fs::exists(bg)) {
      throw Error(Errc::MissingBackground, fmt::format("{}: {} (run 'backgrounds' first)", name(v), bg.string()));
    }
    write_probability16(out, compute_fpm(segmenter.predict(read_color16(bg)), fg));
    ++stats.written;
  };
  if (!v.is_ptz()) derive(cache.background(v, Slot::Empty, 1), cache.fpm(v, Slot::Empty, 1));
  for (int t = 1; t <= v.frame_count; ++t) {
    if (fs::exists(cache.fpm(v, Slot::Current, t))) {
      ++stats.skipped;
    } else {
      frame_fpm(config, cache, v, t, load_frame(config.dataset_root, v, t), segmenter, &stats);
    }
    derive(cache.background(v, Slot::Recent, t), cache.fpm(v, Slot::Recent, t));
    if (v.is_ptz()) derive(cache.background(v, Slot::Empty, t), cache.fpm(v, Slot::Empty, t));
  }
  return stats;
}

namespace {

template <typename Reader>
auto cached(const VideoDescriptor& v, const fs::path& p, Reader read) {
  if (!fs::exists(p)) {
    throw Error(Errc::MissingBackground, fmt::format("{}: {} (run 'backgrounds' and 'fpm' first)", name(v), p.string()));
  }
  return read(p);
}

}  // namespace

TrainingExample load_example(const RunConfig& config, const VideoDescriptor& v, int t, bool with_labels) {
  const CacheLayout cache(config.cache_root);
  TrainingExample ex;
  ex.current = load_frame(config.dataset_root, v, t);
  ex.recent_bg = cached(v, cache.background(v, Slot::Recent, t), read_color16);
  ex.empty_bg = cached(v, cache.background(v, Slot::Empty, t), read_color16);
  ex.current_fpm = cached(v, cache.fpm(v, Slot::Current, t), read_probability16);
  ex.recent_fpm = cached(v, cache.fpm(v, Slot::Recent, t), read_probability16);
  ex.empty_fpm = cached(v, cache.fpm(v, Slot::Empty, t), read_probability16);
  if (with_labels) ex.labels = load_ground_truth(config.dataset_root, v, t);
  return ex;
}

NetworkInput load_input(const RunConfig& config, const VideoDescriptor& v, int t) {
  const TrainingExample ex = load_example(config, v, t, false);
  NetworkInput input =
      assemble_input(ex.current, ex.current_fpm, ex.recent_bg, ex.recent_fpm, ex.empty_bg, ex.empty_fpm);
  const auto zeroed = config.train.ablation.zeroed_channels();
  return zeroed.empty() ? input : input.with_channels_zeroed(zeroed);
}

CachedSource::CachedSource(RunConfig config, std::vector<VideoDescriptor> videos, std::vector<Item> items)
    : config_(std::move(config)), videos_(std::move(videos)), items_(std::move(items)) {
  for (const Item& it : items_) {
    if (it.video >= videos_.size()) throw Error(Errc::IndexOutOfRange, "training item names an unknown video");
  }
}

CachedSource CachedSource::for_training(const RunConfig& config, const std::vector<VideoDescriptor>& videos) {
  std::vector<Item> items;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const VideoDescriptor& v = videos[i];
    // Optional fixed frame list, one index per whitespace-separated token.
    const fs::path manifest_path = video_dir(config.dataset_root, {v.category, v.video}) / "trainFrames.txt";
    std::vector<int> frames;
    if (fs::exists(manifest_path)) {
      std::ifstream in(manifest_path);
      const std::vector<int> manifest{std::istream_iterator<int>(in), std::istream_iterator<int>()};
      frames = select_training_frames(v, config.train.frames_per_video, &manifest);
    } else {
      frames = select_training_frames(v, config.train.frames_per_video);
    }
    for (int t : frames) items.push_back({i, t});
  }
  return CachedSource(config, videos, std::move(items));
}

TrainingExample CachedSource::load(std::size_t index) const {
  const Item& it = items_.at(index);
  return load_example(config_, videos_[it.video], it.frame, true);
}

ProbabilityMap predict_full(const SegmentationNet& net, const NetworkInput& input) {
  auto [padded, record] = pad_for_network(input, net.config().pooling_steps());
  const NetworkInput batch_items[] = {std::move(padded)};
  return crop_to_original(output_map(net.predict(to_batch(batch_items)), 0), record);
}

int infer_video(const SegmentationNet& net, const RunConfig& config, const VideoDescriptor& v,
                const fs::path& masks_dir) {
  const fs::path dir = masks_dir / v.category / v.video;
  fs::create_directories(dir);
  int written = 0;
  for (int t = v.temporal_roi.first; t <= v.temporal_roi.last; ++t) {
    const ProbabilityMap prob = predict_full(net, load_input(config, v, t));
    write_gray8(dir / fmt::format("bin{:06d}.png", t), encode_mask(binarize(prob, config.threshold)));
    ++written;
  }
  return written;
}

}  // namespace bsuv
