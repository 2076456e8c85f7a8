#include "bsuv/background.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

ColorFrame temporal_median(std::span<const ColorFrame* const> frames) {
  if (frames.empty()) throw Error(Errc::EmptySequence, "temporal median of zero frames");
  const Shape2 shape = frames.front()->shape();
  std::vector<std::span<const double>> samples;
  samples.reserve(frames.size());
  for (const ColorFrame* f : frames) {
    if (f->shape() != shape) {
      throw Error(Errc::ShapeMismatch, fmt::format("frame {} vs {}", to_string(f->shape()), to_string(shape)));
    }
    samples.push_back(f->data());
  }
  std::vector<double> out(frames.front()->data().size());
  kernels::temporal_median(samples, out);
  return ColorFrame(shape.height, shape.width, std::move(out));
}

ColorFrame temporal_median(std::span<const ColorFrame> frames) {
  std::vector<const ColorFrame*> ptrs;
  ptrs.reserve(frames.size());
  for (const auto& f : frames) ptrs.push_back(&f);
  return temporal_median(std::span<const ColorFrame* const>(ptrs));
}

namespace {

ColorFrame median_of(std::span<const ColorFrame> video, std::span<const int> indices) {
  std::vector<const ColorFrame*> ptrs;
  for (int i : indices) {
    if (i < 1 || i > static_cast<int>(video.size())) {
      throw Error(Errc::IndexOutOfRange, fmt::format("frame {} of {}", i, video.size()));
    }
    ptrs.push_back(&video[static_cast<std::size_t>(i - 1)]);
  }
  if (ptrs.empty()) throw Error(Errc::NoEligibleFrames, "no frames selected for the empty background");
  return temporal_median(std::span<const ColorFrame* const>(ptrs));
}

}  // namespace

ColorFrame empty_background(std::span<const ColorFrame> video, const EmptyBackgroundPolicy& policy,
                            std::span<const int> foreground_free) {
  if (std::holds_alternative<ManualFrameList>(policy)) {
    const auto& frames = std::get<ManualFrameList>(policy).frames;
    if (frames.empty()) throw Error(Errc::NoEligibleFrames, "manual frame list is empty");
    return median_of(video, frames);
  }
  if (std::holds_alternative<AllFrames>(policy)) {
    if (video.empty()) throw Error(Errc::NoEligibleFrames, "video has no frames");
    return temporal_median(video);
  }
  if (std::holds_alternative<PtzPolicy>(policy)) {
    throw Error(Errc::InvalidConfig, "PTZ videos have no empty background; use ptz_backgrounds");
  }
  const int horizon = std::min<int>(kAutoEmptyHorizon, static_cast<int>(video.size()));
  std::vector<int> selected;
  for (int i : foreground_free) {
    if (i >= 1 && i <= horizon) selected.push_back(i);
  }
  if (selected.empty()) {
    throw Error(Errc::NoEligibleFrames,
                fmt::format("no foreground-free frame within the first {} frames; supply a manual frame list",
                            horizon));
  }
  return median_of(video, selected);
}

ColorFrame recent_background(std::span<const ColorFrame> video, int t, int window) {
  const int n = static_cast<int>(video.size());
  if (t < 2 || t > n) throw Error(Errc::IndexOutOfRange, fmt::format("recent background at t={} of {}", t, n));
  if (window < 1) throw Error(Errc::InvalidConfig, "window must be positive");
  const int first = std::max(1, t - window);
  return temporal_median(video.subspan(static_cast<std::size_t>(first - 1), static_cast<std::size_t>(t - first)));
}

BackgroundPair ptz_backgrounds(std::span<const ColorFrame> video, int t) {
  return {recent_background(video, t, kRecentWindow), recent_background(video, t, kPtzShortWindow)};
}

RecentBackgroundStream::RecentBackgroundStream(Shape2 shape, int window)
    : shape_(shape),
      window_(window),
      median_(static_cast<std::size_t>(shape.height) * shape.width * ColorFrame::kChannels,
              static_cast<std::size_t>(std::max(window, 1))) {
  if (window < 1) throw Error(Errc::InvalidConfig, "window must be positive");
}

void RecentBackgroundStream::push(const ColorFrame& frame) {
  if (frame.shape() != shape_) throw Error(Errc::ShapeMismatch, "stream frame shape");
  if (static_cast<int>(held_.size()) == window_) {
    median_.pop(held_.front().data());
    held_.pop_front();
  }
  median_.push(frame.data());
  held_.push_back(frame);
  ++pushed_;
}

ColorFrame RecentBackgroundStream::current() const {
  if (held_.empty()) throw Error(Errc::EmptySequence, "no frames pushed");
  std::vector<double> out(median_.elements());
  median_.median(out);
  return ColorFrame(shape_.height, shape_.width, std::move(out));
}

}  // namespace bsuv
