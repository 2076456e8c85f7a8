#pragma once

#include <cstdint>
#include <span>

#include "bsuv/types.hpp"

namespace bsuv {

/// Pixel counts over evaluated (non-ignored) pixels.
struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t ignored = 0;  // UnknownMotion + OutsideROI

  std::uint64_t evaluated() const noexcept { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn, ignored += o.ignored;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

namespace kernels {

// Foreground is the positive class, HardShadow counts as background,
// UnknownMotion and OutsideROI are skipped. Parallel reduction over pixels.
ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const Label> gt);

namespace reference {
ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const Label> gt);
}

}  // namespace kernels
}  // namespace bsuv
