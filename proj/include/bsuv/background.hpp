#pragma once

#include <deque>
#include <span>
#include <vector>

#include "bsuv/kernels/median.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

inline constexpr int kRecentWindow = 100;
inline constexpr int kPtzShortWindow = 30;
inline constexpr int kAutoEmptyHorizon = 100;

struct BackgroundPair {
  ColorFrame empty_bg;   // distant-history reference (100-frame window for PTZ)
  ColorFrame recent_bg;  // recent-history reference (30-frame window for PTZ)
};

/// Per-pixel, per-channel median. Throws EmptySequence or ShapeMismatch.
ColorFrame temporal_median(std::span<const ColorFrame> frames);
ColorFrame temporal_median(std::span<const ColorFrame* const> frames);

/// Empty reference for one video. `foreground_free` lists 1-based frame
/// indices known to hold no foreground; AutoFirst100 keeps those within the
/// first 100 frames. Throws NoEligibleFrames when nothing is selected.
ColorFrame empty_background(std::span<const ColorFrame> video, const EmptyBackgroundPolicy& policy,
                            std::span<const int> foreground_free = {});

/// Median of frames max(1, t - window) .. t - 1 (1-based). Requires 2 <= t <= size.
ColorFrame recent_background(std::span<const ColorFrame> video, int t, int window = kRecentWindow);

/// PTZ variant: both slots are recent medians, over 100 and 30 preceding frames.
BackgroundPair ptz_backgrounds(std::span<const ColorFrame> video, int t);

/// Streams recent backgrounds over a video without re-sorting each window.
/// After frames 1..k have been pushed, current() equals
/// recent_background(video, k + 1, window) bit for bit.
class RecentBackgroundStream {
 public:
  RecentBackgroundStream(Shape2 shape, int window);

  void push(const ColorFrame& frame);
  ColorFrame current() const;
  int pushed() const noexcept { return pushed_; }

 private:
  Shape2 shape_;
  int window_;
  int pushed_ = 0;
  std::deque<ColorFrame> held_;
  kernels::SlidingMedian median_;
};

}  // namespace bsuv
