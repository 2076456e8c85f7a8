#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

#include "bsuv/image_io.hpp"

namespace bsuv::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() / fmt::format("{}-{}-{}", tag, ::getpid(), counter++);
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ColorFrame random_frame(int h, int w, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(h) * w * 3);
  for (double& x : v) x = u(rng);
  return ColorFrame(h, w, std::move(v));
}

ProbabilityMap random_probability(int h, int w, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(h) * w);
  for (double& x : v) x = u(rng);
  return ProbabilityMap(h, w, std::move(v));
}

BinaryMask random_mask(int h, int w, Rng& rng, double p) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = b(rng) ? 1 : 0;
  return BinaryMask(h, w, std::move(v));
}

LabelMap random_labels(int h, int w, Rng& rng) {
  std::uniform_int_distribution<int> d(0, 4);
  std::vector<Label> v(static_cast<std::size_t>(h) * w);
  for (auto& x : v) x = static_cast<Label>(d(rng));
  return LabelMap(h, w, std::move(v));
}

NetworkInput random_input(int h, int w, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(h) * w * NetworkInput::kChannels);
  for (double& x : v) x = u(rng);
  return NetworkInput(h, w, std::move(v));
}

std::array<double, 3> backdrop_colour(const SyntheticVideo& spec, int y, int x) {
  std::array<double, 3> c = spec.base;
  double ramp = 0.0;
  switch (spec.backdrop) {
    case Backdrop::Static:
      // Fixed low-contrast checker texture.
      ramp = ((y / 6 + x / 6) % 2) ? 0.05 : -0.05;
      break;
    case Backdrop::HorizontalRamp:
      ramp = 0.4 * (static_cast<double>(x) / std::max(1, spec.width - 1) - 0.5);
      break;
    case Backdrop::VerticalRamp:
      ramp = 0.4 * (static_cast<double>(y) / std::max(1, spec.height - 1) - 0.5);
      break;
  }
  for (double& v : c) v = std::clamp(v + ramp, 0.0, 1.0);
  return c;
}

std::pair<int, int> square_position(const SyntheticVideo& spec, int t) {
  if (t < spec.first_object_frame) return {-1, -1};
  const int k = t - spec.first_object_frame;
  const int span_x = spec.width - spec.square;
  const int span_y = spec.height - spec.square;
  // Bounce horizontally at 3 px/frame, drift vertically at 1 px/frame.
  const int px = (k * 3) % (2 * span_x);
  const int py = (k + span_y / 3) % (2 * span_y);
  return {px < span_x ? px : 2 * span_x - px, py < span_y ? py : 2 * span_y - py};
}

void write_synthetic_video(const fs::path& root, const SyntheticVideo& spec) {
  const fs::path dir = root / spec.category / spec.video;
  fs::create_directories(dir / "input");
  fs::create_directories(dir / "groundtruth");
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise);
  for (int t = 1; t <= spec.frames; ++t) {
    const auto [sx, sy] = square_position(spec, t);
    std::vector<double> rgb(static_cast<std::size_t>(spec.height) * spec.width * 3);
    GrayImage8 gt{spec.height, spec.width, std::vector<std::uint8_t>(static_cast<std::size_t>(spec.height) * spec.width)};
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const bool inside = sx >= 0 && x >= sx && x < sx + spec.square && y >= sy && y < sy + spec.square;
        const auto c = inside ? spec.object : backdrop_colour(spec, y, x);
        for (int ch = 0; ch < 3; ++ch) {
          rgb[(static_cast<std::size_t>(y) * spec.width + x) * 3 + ch] =
              std::clamp(c[static_cast<std::size_t>(ch)] + (spec.noise > 0 ? noise(rng) : 0.0), 0.0, 1.0);
        }
        gt.pixels[static_cast<std::size_t>(y) * spec.width + x] = inside ? label_code::kForeground : label_code::kBackground;
      }
    }
    write_color8(dir / "input" / fmt::format("in{:06d}.png", t), ColorFrame(spec.height, spec.width, std::move(rgb)));
    write_gray8(dir / "groundtruth" / fmt::format("gt{:06d}.png", t), gt);
  }
  std::ofstream(dir / "temporalROI.txt") << spec.roi_first << " " << spec.frames << "\n";
  if (spec.write_empty_frames && spec.first_object_frame > 1) {
    std::ofstream out(dir / "emptyFrames.txt");
    const int last = std::min(spec.first_object_frame - 1, spec.frames);
    for (int t = 1; t <= last; ++t) out << t << (t < last ? " " : "\n");
  }
}

}  // namespace bsuv::testing

#include "bsuv/loss.hpp"

namespace bsuv::testing {

std::vector<GradientSample> network_gradient_check(const NetworkConfig& config, std::uint64_t seed, int batch,
                                                   int height, int width, int count, double step,
                                                   bool skip_kinks) {
  SegmentationNet net = SegmentationNet::build(config, seed);
  Rng data_rng(seed + 1);
  std::vector<NetworkInput> inputs;
  std::vector<BinaryMask> truths;
  for (int b = 0; b < batch; ++b) {
    inputs.push_back(random_input(height, width, data_rng));
    truths.push_back(random_mask(height, width, data_rng, 0.3));
  }
  const Tensor4 x = to_batch(inputs);
  const std::uint64_t dropout_seed = seed + 2;

  auto loss_of = [&](const Tensor4& out) {
    double l = 0.0;
    for (int b = 0; b < batch; ++b) l += jaccard_loss(truths[b], output_map(out, b), 1.0);
    return l / batch;
  };
  // Which units are active and which pool inputs win.
  auto pattern_of = [](const ForwardTape& tape) {
    std::vector<bool> p;
    auto add = [&](const Tensor4& t) {
      for (double v : t.data) p.push_back(v > 0.0);
    };
    for (const auto& stage : tape.encoder)
      for (const auto& b : stage) add(*b.input);
    for (const auto& b : tape.up) add(*b.input);
    for (const auto& stage : tape.decoder)
      for (const auto& b : stage) add(*b.input);
    add(*tape.head_input);
    for (const auto& pool : tape.pools)
      for (auto a : pool.argmax) p.push_back(a & 1), p.push_back(a & 2);
    return p;
  };
  std::vector<bool> pattern;
  auto evaluate = [&] {
    Rng rng(dropout_seed);
    ForwardTape tape;
    const double l = loss_of(net.forward_train(x, rng, tape, false));
    pattern = pattern_of(tape);
    return l;
  };

  net.parameters().zero_grad();
  Rng rng(dropout_seed);
  ForwardTape tape;
  const Tensor4 out = net.forward_train(x, rng, tape, false);
  Tensor4 grad(out.n, out.c, out.h, out.w);
  for (int b = 0; b < batch; ++b) {
    const auto g = jaccard_loss_gradient(truths[b], output_map(out, b), 1.0);
    auto dst = grad.sample(b);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = g[i] / batch;
  }
  net.backward(tape, grad);
  const std::vector<bool> base_pattern = pattern_of(tape);

  std::vector<std::size_t> trainable;
  auto& tensors = net.parameters().tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].trainable) trainable.push_back(i);
  }
  Rng pick(seed + 3);
  std::vector<GradientSample> out_samples;
  for (int smooth = 0; smooth < count;) {
    const std::size_t ti = trainable[std::uniform_int_distribution<std::size_t>(0, trainable.size() - 1)(pick)];
    ParamTensor& t = tensors[ti];
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, t.numel() - 1)(pick);
    const double orig = t.value[k];
    t.value[k] = orig + step;
    const double up = evaluate();
    bool kink = pattern != base_pattern;
    t.value[k] = orig - step;
    const double down = evaluate();
    kink |= pattern != base_pattern;
    t.value[k] = orig;
    GradientSample g{t.name, k, t.grad[k], (up - down) / (2 * step), 0.0, kink};
    smooth += !(skip_kinks && kink);
    const double scale = std::max(std::abs(g.analytic), std::abs(g.numeric));
    g.rel_error = scale == 0.0 ? 0.0 : std::abs(g.analytic - g.numeric) / scale;
    out_samples.push_back(g);
  }
  return out_samples;
}

}  // namespace bsuv::testing
