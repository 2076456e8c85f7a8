#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "bsuv/background.hpp"
#include "bsuv/kernels/median.hpp"
#include "support.hpp"

using namespace bsuv;
using bsuv::testing::error_code_of;

namespace {

// Independent oracle: copy, full sort, pick the middle (mean of the two
// middles for even counts).
double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ColorFrame oracle_median(const std::vector<ColorFrame>& frames, const std::vector<int>& one_based) {
  const Shape2 s = frames.front().shape();
  std::vector<double> out(static_cast<std::size_t>(s.height) * s.width * 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<double> column;
    for (int t : one_based) column.push_back(frames[static_cast<std::size_t>(t - 1)].data()[i]);
    out[i] = sorted_median(std::move(column));
  }
  return ColorFrame(s.height, s.width, std::move(out));
}

std::vector<int> range(int first, int last) {
  std::vector<int> r(static_cast<std::size_t>(last - first + 1));
  std::iota(r.begin(), r.end(), first);
  return r;
}

ColorFrame pixel(double v) { return ColorFrame(1, 1, std::vector<double>{v, v, v}); }

// Pixel value equals frame index / 255 (frame indices up to 255).
std::vector<ColorFrame> ramp_video(int n) {
  std::vector<ColorFrame> v;
  for (int t = 1; t <= n; ++t) v.push_back(ColorFrame(2, 2, t / 255.0));
  return v;
}

std::vector<ColorFrame> random_video(int n, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ColorFrame> v;
  for (int t = 0; t < n; ++t) v.push_back(bsuv::testing::random_frame(h, w, rng));
  return v;
}

}  // namespace

TEST_CASE("temporal median worked examples") {
  const ColorFrame f = ColorFrame(2, 3, 0.25);
  const std::vector<ColorFrame> copies(5, f);
  CHECK(temporal_median(copies) == f);

  const std::vector<ColorFrame> odd{pixel(0.1), pixel(0.9), pixel(0.4)};
  CHECK(temporal_median(odd).at(0, 0, 0) == 0.4);

  const std::vector<ColorFrame> even{pixel(0.0), pixel(1.0), pixel(0.2), pixel(0.6)};
  CHECK(temporal_median(even).at(0, 0, 0) == (0.2 + 0.6) / 2);

  CHECK(error_code_of([] { temporal_median(std::span<const ColorFrame>{}); }) == Errc::EmptySequence);
  const std::vector<ColorFrame> mixed{ColorFrame(2, 2), ColorFrame(2, 3)};
  CHECK(error_code_of([&] { temporal_median(mixed); }) == Errc::ShapeMismatch);
}

TEST_CASE("median kernel matches the sort oracle for odd and even counts") {
  for (int n : {1, 2, 3, 4, 7, 10, 31, 100}) {
    const auto video = random_video(n, 5, 4, 100 + n);
    CHECK(temporal_median(video) == oracle_median(video, range(1, n)));
  }
}

TEST_CASE("optimized and reference median kernels agree bit for bit") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n : {1, 2, 5, 6, 99, 100}) {
    std::vector<std::vector<double>> storage(static_cast<std::size_t>(n), std::vector<double>(257));
    for (auto& s : storage)
      for (auto& v : s) v = u(rng) < 0.2 ? 0.5 : u(rng);  // plenty of ties
    std::vector<std::span<const double>> samples(storage.begin(), storage.end());
    std::vector<double> a(257), b(257);
    kernels::temporal_median(samples, a);
    kernels::reference::temporal_median(samples, b);
    CHECK(a == b);
  }
}

TEST_CASE("temporal median is permutation invariant and bounded") {
  auto video = random_video(9, 4, 4, 5);
  const ColorFrame m = temporal_median(video);
  Rng rng(6);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(video.begin(), video.end(), rng);
    CHECK(temporal_median(video) == m);
  }
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    double lo = 1.0, hi = 0.0;
    for (const auto& f : video) lo = std::min(lo, f.data()[i]), hi = std::max(hi, f.data()[i]);
    CHECK(m.data()[i] >= lo);
    CHECK(m.data()[i] <= hi);
  }
}

TEST_CASE("fewer than half outlier frames leave a constant background unchanged") {
  const ColorFrame scene(6, 6, 0.3);
  Rng rng(7);
  for (int n : {5, 10, 21}) {
    const int outliers = (n + 1) / 2 - 1;
    std::vector<ColorFrame> video(static_cast<std::size_t>(n - outliers), scene);
    for (int k = 0; k < outliers; ++k) video.push_back(bsuv::testing::random_frame(6, 6, rng));
    std::shuffle(video.begin(), video.end(), rng);
    CHECK(temporal_median(video) == scene);
  }
}

TEST_CASE("empty background policies") {
  const auto video = random_video(120, 4, 5, 11);

  SUBCASE("manual list uses exactly the listed frames") {
    CHECK(empty_background(video, ManualFrameList{{5, 17, 90}}) ==
          temporal_median(std::vector<ColorFrame>{video[4], video[16], video[89]}));
    CHECK(error_code_of([&] { empty_background(video, ManualFrameList{{121}}); }) == Errc::IndexOutOfRange);
  }
  SUBCASE("auto selection keeps foreground-free frames within the first 100") {
    const std::vector<ColorFrame> static_scene(120, ColorFrame(4, 5, 0.6));
    const auto all = range(1, 100);
    CHECK(empty_background(static_scene, AutoFirst100{}, all) == static_scene[0]);

    const std::vector<int> free{3, 50, 100, 101, 115};
    CHECK(empty_background(video, AutoFirst100{}, free) == oracle_median(video, {3, 50, 100}));
    CHECK(error_code_of([&] { empty_background(video, AutoFirst100{}, {}); }) == Errc::NoEligibleFrames);
    const std::vector<int> late{101, 110};
    CHECK(error_code_of([&] { empty_background(video, AutoFirst100{}, late); }) == Errc::NoEligibleFrames);
  }
  SUBCASE("all-frames policy takes the whole video") {
    CHECK(empty_background(video, AllFrames{}) == oracle_median(video, range(1, 120)));
  }
}

TEST_CASE("recent background window") {
  const auto video = random_video(130, 3, 4, 12);
  CHECK(recent_background(video, 101) == oracle_median(video, range(1, 100)));
  CHECK(recent_background(video, 31) == oracle_median(video, range(1, 30)));
  CHECK(recent_background(video, 130) == oracle_median(video, range(30, 129)));
  CHECK(recent_background(video, 2) == video[0]);
  CHECK(recent_background(video, 50, 7) == oracle_median(video, range(43, 49)));
  CHECK(error_code_of([&] { recent_background(video, 1); }) == Errc::IndexOutOfRange);
  CHECK(error_code_of([&] { recent_background(video, 131); }) == Errc::IndexOutOfRange);

  const std::vector<ColorFrame> still(40, ColorFrame(3, 4, 0.2));
  for (int t : {2, 17, 40}) CHECK(recent_background(still, t) == still[0]);
}

TEST_CASE("PTZ backgrounds use 100- and 30-frame windows") {
  const auto video = random_video(210, 3, 3, 13);
  const BackgroundPair p = ptz_backgrounds(video, 200);
  CHECK(p.empty_bg == oracle_median(video, range(100, 199)));
  CHECK(p.recent_bg == oracle_median(video, range(170, 199)));

  const auto ramp = ramp_video(101);
  const BackgroundPair r = ptz_backgrounds(ramp, 101);
  for (double v : r.empty_bg.data()) CHECK(v == doctest::Approx(50.5 / 255).epsilon(1e-15));
  for (double v : r.recent_bg.data()) CHECK(v == doctest::Approx(85.5 / 255).epsilon(1e-15));
  CHECK(r.empty_bg == oracle_median(ramp, range(1, 100)));
  CHECK(r.recent_bg == oracle_median(ramp, range(71, 100)));

  const std::vector<ColorFrame> still(50, ColorFrame(2, 2, 0.7));
  const BackgroundPair s = ptz_backgrounds(still, 45);
  CHECK(s.empty_bg == still[0]);
  CHECK(s.recent_bg == still[0]);
}

TEST_CASE("streaming recent background is bit-identical to the batch median") {
  for (int window : {1, 4, 30, 100}) {
    const auto video = random_video(140, 4, 3, 20 + window);
    RecentBackgroundStream stream(video[0].shape(), window);
    for (int t = 2; t <= static_cast<int>(video.size()); ++t) {
      stream.push(video[static_cast<std::size_t>(t - 2)]);
      REQUIRE(stream.pushed() == t - 1);
      CHECK(stream.current() == recent_background(video, t, window));
    }
  }
}

TEST_CASE("sliding median handles duplicate samples") {
  kernels::SlidingMedian m(1, 4);
  const double a[] = {0.5}, b[] = {0.2};
  m.push(a), m.push(a), m.push(b), m.push(a);
  double out[1];
  m.median(out);
  CHECK(out[0] == 0.5);
  m.pop(a), m.pop(a);
  m.median(out);
  CHECK(out[0] == (0.2 + 0.5) / 2);
  CHECK(m.count() == 2);
}
