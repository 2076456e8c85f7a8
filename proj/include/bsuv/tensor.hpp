#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bsuv {

/// Dense NCHW activation tensor.
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, double fill = 0.0)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const noexcept { return plane_size() * c; }

  double& at(int in, int ic, int y, int x) {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x];
  }
  double at(int in, int ic, int y, int x) const {
    return data[((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x];
  }
  std::span<double> sample(int in) { return std::span<double>(data).subspan(in * sample_size(), sample_size()); }
  std::span<const double> sample(int in) const {
    return std::span<const double>(data).subspan(in * sample_size(), sample_size());
  }
  bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

}  // namespace bsuv
