#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bsuv::kernels {

// Median rule shared by every implementation: the middle order statistic for
// odd counts, the mean of the two central order statistics for even counts.

/// Element-wise median across `samples` (all the same length). Parallel over
/// elements; uses selection rather than a full sort.
void temporal_median(std::span<const std::span<const double>> samples, std::span<double> out);

namespace reference {
/// Serial sort-based median; the oracle for the kernels above.
void temporal_median(std::span<const std::span<const double>> samples, std::span<double> out);
}  // namespace reference

/// Per-element sliding multiset: push adds one sample to every element's
/// window, pop removes a previously pushed sample. Each window is kept sorted
/// so the median is read off without re-sorting.
class SlidingMedian {
 public:
  SlidingMedian(std::size_t elements, std::size_t capacity);

  void push(std::span<const double> sample);
  void pop(std::span<const double> sample);
  void median(std::span<double> out) const;

  std::size_t count() const noexcept { return count_; }
  std::size_t elements() const noexcept { return elements_; }

 private:
  std::size_t elements_;
  std::size_t capacity_;
  std::size_t count_ = 0;
  std::vector<double> sorted_;  // elements_ x capacity_, first count_ of each row valid
};

}  // namespace bsuv::kernels
