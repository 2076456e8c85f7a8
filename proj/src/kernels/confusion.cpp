#include "bsuv/kernels/confusion.hpp"

#include "bsuv/error.hpp"

namespace bsuv::kernels {

ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const Label> gt) {
  if (pred.size() != gt.size()) throw Error(Errc::ShapeMismatch, "prediction and ground truth differ in size");
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0, ignored = 0;
  const auto n = static_cast<std::ptrdiff_t>(pred.size());
#pragma omp parallel for schedule(static) reduction(+ : tp, fp, tn, fn, ignored)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Label g = gt[static_cast<std::size_t>(i)];
    if (g == Label::UnknownMotion || g == Label::OutsideROI) {
      ++ignored;
      continue;
    }
    const bool positive = g == Label::Foreground;
    const bool predicted = pred[static_cast<std::size_t>(i)] != 0;
    tp += positive && predicted;
    fn += positive && !predicted;
    fp += !positive && predicted;
    tn += !positive && !predicted;
  }
  return {tp, fp, tn, fn, ignored};
}

namespace reference {

ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const Label> gt) {
  if (pred.size() != gt.size()) throw Error(Errc::ShapeMismatch, "prediction and ground truth differ in size");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    switch (gt[i]) {
      case Label::UnknownMotion:
      case Label::OutsideROI: ++c.ignored; break;
      case Label::Foreground: pred[i] ? ++c.tp : ++c.fn; break;
      case Label::Background:
      case Label::HardShadow: pred[i] ? ++c.fp : ++c.tn; break;
    }
  }
  return c;
}

}  // namespace reference
}  // namespace bsuv::kernels
