#include "bsuv/kernels/median.hpp"

#include <algorithm>
#include <cstring>

#include "bsuv/error.hpp"

namespace bsuv::kernels {

namespace {

void check_samples(std::span<const std::span<const double>> samples, std::size_t n) {
  if (samples.empty()) throw Error(Errc::EmptySequence, "median of zero samples");
  for (const auto& s : samples) {
    if (s.size() != n) throw Error(Errc::ShapeMismatch, "median samples differ in size");
  }
}

}  // namespace

void temporal_median(std::span<const std::span<const double>> samples, std::span<double> out) {
  const std::size_t n = out.size();
  check_samples(samples, n);
  const std::size_t k = samples.size();
  const auto count = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel
  {
    std::vector<double> buf(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < k; ++j) buf[j] = samples[j][static_cast<std::size_t>(i)];
      auto mid = buf.begin() + static_cast<std::ptrdiff_t>(k / 2);
      std::nth_element(buf.begin(), mid, buf.end());
      if (k % 2 == 1) {
        out[static_cast<std::size_t>(i)] = *mid;
      } else {
        const double lower = *std::max_element(buf.begin(), mid);
        out[static_cast<std::size_t>(i)] = (lower + *mid) / 2.0;
      }
    }
  }
}

namespace reference {

void temporal_median(std::span<const std::span<const double>> samples, std::span<double> out) {
  check_samples(samples, out.size());
  const std::size_t k = samples.size();
  std::vector<double> buf(k);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) buf[j] = samples[j][i];
    std::sort(buf.begin(), buf.end());
    out[i] = k % 2 == 1 ? buf[k / 2] : (buf[k / 2 - 1] + buf[k / 2]) / 2.0;
  }
}

}  // namespace reference

SlidingMedian::SlidingMedian(std::size_t elements, std::size_t capacity)
    : elements_(elements), capacity_(capacity), sorted_(elements * capacity) {
  if (capacity == 0) throw Error(Errc::InvalidConfig, "sliding median capacity must be positive");
}

void SlidingMedian::push(std::span<const double> sample) {
  if (sample.size() != elements_) throw Error(Errc::ShapeMismatch, "sliding median sample size");
  if (count_ == capacity_) throw Error(Errc::IndexOutOfRange, "sliding median window full");
  const auto n = static_cast<std::ptrdiff_t>(elements_);
  const std::size_t len = count_;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double* row = sorted_.data() + static_cast<std::size_t>(i) * capacity_;
    const double v = sample[static_cast<std::size_t>(i)];
    double* pos = std::upper_bound(row, row + len, v);
    std::memmove(pos + 1, pos, static_cast<std::size_t>(row + len - pos) * sizeof(double));
    *pos = v;
  }
  ++count_;
}

void SlidingMedian::pop(std::span<const double> sample) {
  if (sample.size() != elements_) throw Error(Errc::ShapeMismatch, "sliding median sample size");
  if (count_ == 0) throw Error(Errc::EmptySequence, "pop from empty sliding median");
  const auto n = static_cast<std::ptrdiff_t>(elements_);
  const std::size_t len = count_;
  bool missing = false;
#pragma omp parallel for schedule(static) reduction(|| : missing)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double* row = sorted_.data() + static_cast<std::size_t>(i) * capacity_;
    double* pos = std::lower_bound(row, row + len, sample[static_cast<std::size_t>(i)]);
    if (pos == row + len || *pos != sample[static_cast<std::size_t>(i)]) {
      missing = true;
      continue;
    }
    std::memmove(pos, pos + 1, static_cast<std::size_t>(row + len - pos - 1) * sizeof(double));
  }
  if (missing) throw Error(Errc::IndexOutOfRange, "popped a sample that was never pushed");
  --count_;
}

void SlidingMedian::median(std::span<double> out) const {
  if (out.size() != elements_) throw Error(Errc::ShapeMismatch, "sliding median output size");
  if (count_ == 0) throw Error(Errc::EmptySequence, "median of empty window");
  const std::size_t k = count_;
  for (std::size_t i = 0; i < elements_; ++i) {
    const double* row = sorted_.data() + i * capacity_;
    out[i] = k % 2 == 1 ? row[k / 2] : (row[k / 2 - 1] + row[k / 2]) / 2.0;
  }
}

}  // namespace bsuv::kernels
