// Reference (serial) kernels against the OpenMP versions.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bsuv/kernels/confusion.hpp"
#include "bsuv/kernels/conv.hpp"
#include "bsuv/kernels/median.hpp"

namespace {

using namespace bsuv;

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Tensor4 random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  Tensor4 t(n, c, h, w);
  t.data = uniform(t.size(), seed);
  return t;
}

// args: channels in/out, spatial side
template <bool Reference>
void BM_Conv3x3Forward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const Tensor4 x = random_tensor(2, c, side, side, 1);
  const auto w = uniform(static_cast<std::size_t>(c) * c * 9, 2);
  Tensor4 y;
  for (auto _ : state) {
    if constexpr (Reference)
      kernels::reference::conv3x3_forward(x, w, c, y);
    else
      kernels::conv3x3_forward(x, w, c, y);
    benchmark::DoNotOptimize(y.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * c * c * 9 * side * side);
}

template <bool Reference>
void BM_Conv3x3Backward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const Tensor4 x = random_tensor(2, c, side, side, 3);
  const Tensor4 dy = random_tensor(2, c, side, side, 4);
  const auto w = uniform(static_cast<std::size_t>(c) * c * 9, 5);
  std::vector<double> dw(w.size());
  Tensor4 dx(2, c, side, side);
  for (auto _ : state) {
    if constexpr (Reference)
      kernels::reference::conv3x3_backward(x, w, dy, &dx, dw);
    else
      kernels::conv3x3_backward(x, w, dy, &dx, dw);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <bool Reference>
void BM_UpConvForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), side = static_cast<int>(state.range(1));
  const Tensor4 x = random_tensor(2, c, side, side, 6);
  const auto w = uniform(static_cast<std::size_t>(c) * c * 9, 7);
  Tensor4 y;
  for (auto _ : state) {
    if constexpr (Reference)
      kernels::reference::upconv3x3_forward(x, w, c, y);
    else
      kernels::upconv3x3_forward(x, w, c, y);
    benchmark::DoNotOptimize(y.data.data());
  }
}

// args: frame count, pixels per frame (x3 channels)
template <bool Reference>
void BM_TemporalMedian(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  const auto elements = static_cast<std::size_t>(state.range(1)) * 3;
  std::vector<std::vector<double>> store;
  std::vector<std::span<const double>> samples;
  for (std::size_t f = 0; f < frames; ++f) store.push_back(uniform(elements, 10 + f));
  for (const auto& s : store) samples.emplace_back(s);
  std::vector<double> out(elements);
  for (auto _ : state) {
    if constexpr (Reference)
      kernels::reference::temporal_median(samples, out);
    else
      kernels::temporal_median(samples, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(elements));
}

// Recent-background update: one push, one pop and a median read per frame.
void BM_SlidingMedianStep(benchmark::State& state) {
  const auto window = static_cast<std::size_t>(state.range(0));
  const std::size_t elements = 320 * 240 * 3;
  std::vector<std::vector<double>> frames;
  for (std::size_t f = 0; f <= window; ++f) frames.push_back(uniform(elements, 100 + f));
  kernels::SlidingMedian sm(elements, window);
  for (std::size_t f = 0; f < window; ++f) sm.push(frames[f]);
  std::vector<double> out(elements);
  std::size_t head = 0;
  for (auto _ : state) {
    sm.pop(frames[head]);
    sm.push(frames[head]);
    sm.median(out);
    head = (head + 1) % window;
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Reference>
void BM_Confusion(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(42);
  std::vector<std::uint8_t> pred(n);
  std::vector<Label> gt(n);
  const Label labels[] = {Label::Background, Label::HardShadow, Label::OutsideROI, Label::UnknownMotion,
                          Label::Foreground};
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = static_cast<std::uint8_t>(rng() & 1);
    gt[i] = labels[rng() % 5];
  }
  for (auto _ : state) {
    const ConfusionCounts c =
        Reference ? kernels::reference::count_confusion(pred, gt) : kernels::count_confusion(pred, gt);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_Conv3x3Forward<true>)->Name("conv3x3_forward/reference")->Args({16, 64})->Args({64, 56});
BENCHMARK(BM_Conv3x3Forward<false>)->Name("conv3x3_forward/openmp")->Args({16, 64})->Args({64, 56});
BENCHMARK(BM_Conv3x3Backward<true>)->Name("conv3x3_backward/reference")->Args({16, 64});
BENCHMARK(BM_Conv3x3Backward<false>)->Name("conv3x3_backward/openmp")->Args({16, 64});
BENCHMARK(BM_UpConvForward<true>)->Name("upconv3x3_forward/reference")->Args({32, 32});
BENCHMARK(BM_UpConvForward<false>)->Name("upconv3x3_forward/openmp")->Args({32, 32});
BENCHMARK(BM_TemporalMedian<true>)->Name("temporal_median/reference")->Args({100, 320 * 240})->Args({30, 320 * 240});
BENCHMARK(BM_TemporalMedian<false>)->Name("temporal_median/openmp")->Args({100, 320 * 240})->Args({30, 320 * 240});
BENCHMARK(BM_SlidingMedianStep)->Name("sliding_median_step")->Arg(30)->Arg(100);
BENCHMARK(BM_Confusion<true>)->Name("confusion/reference")->Arg(320 * 240);
BENCHMARK(BM_Confusion<false>)->Name("confusion/openmp")->Arg(320 * 240);

BENCHMARK_MAIN();
