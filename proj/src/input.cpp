#include "bsuv/input.hpp"

#include <fmt/format.h>

#include "bsuv/error.hpp"

namespace bsuv {

NetworkInput assemble_input(const ColorFrame& current, const ProbabilityMap& current_fpm,
                            const ColorFrame& recent_bg, const ProbabilityMap& recent_fpm,
                            const ColorFrame& empty_bg, const ProbabilityMap& empty_fpm) {
  const Shape2 shape = current.shape();
  for (Shape2 s : {current_fpm.shape(), recent_bg.shape(), recent_fpm.shape(), empty_bg.shape(), empty_fpm.shape()}) {
    if (s != shape) {
      throw Error(Errc::ShapeMismatch, fmt::format("input planes {} vs {}", to_string(shape), to_string(s)));
    }
  }
  const std::size_t n = static_cast<std::size_t>(shape.height) * shape.width;
  std::vector<double> planes(n * ChannelOrder::kChannels);

  auto place = [&](Slot slot, const ColorFrame& frame, const ProbabilityMap& fpm) {
    const auto rgb = frame.data();
    for (int c = 0; c < 3; ++c) {
      double* dst = planes.data() + static_cast<std::size_t>(ChannelOrder::rgb(slot, c)) * n;
      for (std::size_t i = 0; i < n; ++i) dst[i] = rgb[i * 3 + c];
    }
    const auto p = fpm.data();
    std::copy(p.begin(), p.end(), planes.begin() + static_cast<std::ptrdiff_t>(ChannelOrder::fpm(slot) * n));
  };
  place(Slot::Current, current, current_fpm);
  place(Slot::Recent, recent_bg, recent_fpm);
  place(Slot::Empty, empty_bg, empty_fpm);
  return NetworkInput(shape.height, shape.width, std::move(planes));
}

}  // namespace bsuv
