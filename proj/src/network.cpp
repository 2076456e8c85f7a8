#include "bsuv/network.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bsuv/error.hpp"
#include "bsuv/kernels/conv.hpp"

namespace bsuv {

void NetworkConfig::validate() const {
  if (stage_widths.empty()) throw Error(Errc::InvalidConfig, "stage_widths must not be empty");
  for (int w : stage_widths) {
    if (w < 1) throw Error(Errc::InvalidConfig, fmt::format("stage width {} must be positive", w));
  }
  if (convs_per_stage < 1) throw Error(Errc::InvalidConfig, "convs_per_stage must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error(Errc::InvalidConfig, "dropout_rate must lie in [0,1)");
  if (stage_widths.size() > 12) throw Error(Errc::InvalidConfig, "too many stages");
}

ParamTensor& ModelParameters::add(std::string name, std::vector<int> shape, bool trainable) {
  if (index_.count(name)) throw Error(Errc::InvalidConfig, "duplicate parameter " + name);
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  index_[name] = tensors_.size();
  ParamTensor t{std::move(name), std::move(shape), std::vector<double>(n, 0.0), {}, trainable};
  if (trainable) t.grad.assign(n, 0.0);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

ParamTensor& ModelParameters::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(Errc::IndexOutOfRange, "no parameter " + name);
  return tensors_[it->second];
}

const ParamTensor& ModelParameters::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(Errc::IndexOutOfRange, "no parameter " + name);
  return tensors_[it->second];
}

std::size_t ModelParameters::trainable_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.trainable ? t.numel() : 0;
  return n;
}

void ModelParameters::zero_grad() {
  for (auto& t : tensors_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

namespace {

std::string enc_name(int s, int k) { return fmt::format("enc{}.conv{}", s, k); }
std::string up_name(int s) { return fmt::format("dec{}.up", s); }
std::string dec_name(int s, int k) { return fmt::format("dec{}.conv{}", s, k); }

struct BnRefs {
  const ParamTensor& gamma;
  const ParamTensor& beta;
  const ParamTensor& mean;
  const ParamTensor& var;
};

BnRefs bn_refs(const ModelParameters& p, const std::string& prefix) {
  return {p.at(prefix + ".bn.gamma"), p.at(prefix + ".bn.beta"), p.at(prefix + ".bn.running_mean"),
          p.at(prefix + ".bn.running_var")};
}

// Convolution (regular or stride-2 transposed) of `input` with the block's weight.
Tensor4 block_conv(const ModelParameters& p, const std::string& prefix, const Tensor4& input, bool up) {
  const ParamTensor& w = p.at(prefix + ".weight");
  Tensor4 z;
  if (up) {
    kernels::upconv3x3_forward(input, w.value, w.shape[1], z);
  } else {
    kernels::conv3x3_forward(input, w.value, w.shape[0], z);
  }
  return z;
}

Tensor4 bn_relu_eval(Tensor4 z, const BnRefs& bn) {
  const std::size_t plane = z.plane_size();
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < z.n; ++n) {
    for (int c = 0; c < z.c; ++c) {
      const double scale = bn.gamma.value[c] / std::sqrt(bn.var.value[c] + SegmentationNet::kBnEpsilon);
      const double shift = bn.beta.value[c] - bn.mean.value[c] * scale;
      double* d = z.data.data() + (static_cast<std::size_t>(n) * z.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) d[i] = std::max(0.0, d[i] * scale + shift);
    }
  }
  return z;
}

// Training-mode batch norm + ReLU. z is normalized in place into rec.xhat.
Tensor4 bn_relu_train(Tensor4 z, const BnRefs& bn, ModelParameters* running, const std::string& prefix,
                      ForwardTape::Block* rec) {
  const std::size_t plane = z.plane_size();
  const double m = static_cast<double>(plane) * z.n;
  std::vector<double> mean(static_cast<std::size_t>(z.c)), inv_std(static_cast<std::size_t>(z.c));
  std::vector<double> var(static_cast<std::size_t>(z.c));
#pragma omp parallel for schedule(static)
  for (int c = 0; c < z.c; ++c) {
    double s = 0.0;
    for (int n = 0; n < z.n; ++n) {
      const double* d = z.data.data() + (static_cast<std::size_t>(n) * z.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) s += d[i];
    }
    const double mu = s / m;
    double v = 0.0;
    for (int n = 0; n < z.n; ++n) {
      const double* d = z.data.data() + (static_cast<std::size_t>(n) * z.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) v += (d[i] - mu) * (d[i] - mu);
    }
    v /= m;
    mean[static_cast<std::size_t>(c)] = mu;
    var[static_cast<std::size_t>(c)] = v;
    inv_std[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(v + SegmentationNet::kBnEpsilon);
  }
  if (running) {
    auto& rm = running->at(prefix + ".bn.running_mean").value;
    auto& rv = running->at(prefix + ".bn.running_var").value;
    const double unbias = m > 1 ? m / (m - 1) : 1.0;
    for (int c = 0; c < z.c; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      rm[ci] = (1 - SegmentationNet::kBnMomentum) * rm[ci] + SegmentationNet::kBnMomentum * mean[ci];
      rv[ci] = (1 - SegmentationNet::kBnMomentum) * rv[ci] + SegmentationNet::kBnMomentum * var[ci] * unbias;
    }
  }
  Tensor4 out(z.n, z.c, z.h, z.w);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < z.n; ++n) {
    for (int c = 0; c < z.c; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const std::size_t off = (static_cast<std::size_t>(n) * z.c + c) * plane;
      double* d = z.data.data() + off;
      double* o = out.data.data() + off;
      const double g = bn.gamma.value[ci], b = bn.beta.value[ci];
      for (std::size_t i = 0; i < plane; ++i) {
        d[i] = (d[i] - mean[ci]) * inv_std[ci];
        o[i] = std::max(0.0, g * d[i] + b);
      }
    }
  }
  if (rec) {
    rec->xhat = std::move(z);
    rec->inv_std = std::move(inv_std);
  }
  return out;
}

// Gradient through ReLU, batch norm (batch statistics) and the convolution.
// Returns dL/d(block input) when need_dx.
Tensor4 block_backward(ModelParameters& p, const std::string& prefix, const ForwardTape::Block& rec,
                       const Tensor4& grad, bool up, bool need_dx) {
  ParamTensor& gamma = p.at(prefix + ".bn.gamma");
  ParamTensor& beta = p.at(prefix + ".bn.beta");
  const Tensor4& xhat = rec.xhat;
  const std::size_t plane = xhat.plane_size();
  const double m = static_cast<double>(plane) * xhat.n;
  Tensor4 dz(xhat.n, xhat.c, xhat.h, xhat.w);

#pragma omp parallel for schedule(static)
  for (int c = 0; c < xhat.c; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const double g = gamma.value[ci], b = beta.value[ci];
    double sum_d = 0.0, sum_dx = 0.0;
    for (int n = 0; n < xhat.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * xhat.c + c) * plane;
      const double* xh = xhat.data.data() + off;
      const double* gr = grad.data.data() + off;
      double* d = dz.data.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        d[i] = (g * xh[i] + b > 0.0) ? gr[i] : 0.0;
        sum_d += d[i];
        sum_dx += d[i] * xh[i];
      }
    }
    gamma.grad[ci] += sum_dx;
    beta.grad[ci] += sum_d;
    const double k = g * rec.inv_std[ci];
    const double mean_d = sum_d / m, mean_dx = sum_dx / m;
    for (int n = 0; n < xhat.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * xhat.c + c) * plane;
      const double* xh = xhat.data.data() + off;
      double* d = dz.data.data() + off;
      for (std::size_t i = 0; i < plane; ++i) d[i] = k * (d[i] - mean_d - xh[i] * mean_dx);
    }
  }

  ParamTensor& w = p.at(prefix + ".weight");
  Tensor4 dx;
  if (up) {
    kernels::upconv3x3_backward(*rec.input, w.value, dz, need_dx ? &dx : nullptr, w.grad);
  } else {
    kernels::conv3x3_backward(*rec.input, w.value, dz, need_dx ? &dx : nullptr, w.grad);
  }
  return dx;
}

Tensor4 max_pool(const Tensor4& x, ForwardTape::Pool* rec) {
  Tensor4 out(x.n, x.c, x.h / 2, x.w / 2);
  if (rec) {
    rec->argmax.assign(out.size(), 0);
    rec->in_h = x.h;
    rec->in_w = x.w;
  }
  const int nc = x.n * x.c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < nc; ++p) {
    const double* src = x.data.data() + static_cast<std::size_t>(p) * x.plane_size();
    double* dst = out.data.data() + static_cast<std::size_t>(p) * out.plane_size();
    for (int y = 0; y < out.h; ++y) {
      for (int xx = 0; xx < out.w; ++xx) {
        std::uint8_t best = 0;
        double v = src[(2 * y) * x.w + 2 * xx];
        for (std::uint8_t k = 1; k < 4; ++k) {
          const double c = src[(2 * y + k / 2) * x.w + 2 * xx + k % 2];
          if (c > v) v = c, best = k;
        }
        const std::size_t o = static_cast<std::size_t>(y) * out.w + xx;
        dst[o] = v;
        if (rec) rec->argmax[static_cast<std::size_t>(p) * out.plane_size() + o] = best;
      }
    }
  }
  return out;
}

Tensor4 max_unpool(const Tensor4& grad, const ForwardTape::Pool& rec) {
  Tensor4 out(grad.n, grad.c, rec.in_h, rec.in_w);
  const int nc = grad.n * grad.c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < nc; ++p) {
    const double* g = grad.data.data() + static_cast<std::size_t>(p) * grad.plane_size();
    double* dst = out.data.data() + static_cast<std::size_t>(p) * out.plane_size();
    for (int y = 0; y < grad.h; ++y) {
      for (int x = 0; x < grad.w; ++x) {
        const std::size_t o = static_cast<std::size_t>(y) * grad.w + x;
        const std::uint8_t k = rec.argmax[static_cast<std::size_t>(p) * grad.plane_size() + o];
        dst[(2 * y + k / 2) * rec.in_w + 2 * x + k % 2] += g[o];
      }
    }
  }
  return out;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  Tensor4 out(a.n, a.c + b.c, a.h, a.w);
  for (int n = 0; n < a.n; ++n) {
    auto dst = out.sample(n);
    std::copy(a.sample(n).begin(), a.sample(n).end(), dst.begin());
    std::copy(b.sample(n).begin(), b.sample(n).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.sample_size()));
  }
  return out;
}

std::pair<Tensor4, Tensor4> split_channels(const Tensor4& t, int first) {
  Tensor4 a(t.n, first, t.h, t.w), b(t.n, t.c - first, t.h, t.w);
  for (int n = 0; n < t.n; ++n) {
    auto src = t.sample(n);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(a.sample_size()), a.sample(n).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(a.sample_size()), src.end(), b.sample(n).begin());
  }
  return {std::move(a), std::move(b)};
}

double sigmoid(double z) {
  const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, SegmentationNet::kOutputFloor, 1.0 - SegmentationNet::kOutputFloor);
}

void check_input(const NetworkConfig& cfg, const Tensor4& x) {
  if (x.c != NetworkConfig::kInputChannels) {
    throw Error(Errc::ShapeMismatch, fmt::format("network expects {} input channels, got {}",
                                                 NetworkConfig::kInputChannels, x.c));
  }
  const int m = cfg.spatial_multiple();
  if (x.n < 1 || x.h < 1 || x.w < 1 || x.h % m != 0 || x.w % m != 0) {
    throw Error(Errc::ShapeNotPoolable,
                fmt::format("input {}x{} is not a multiple of {}; pad first", x.h, x.w, m));
  }
}

// Shared forward pass. `tape`/`rng` non-null selects training mode.
Tensor4 run_forward(const NetworkConfig& cfg, const ModelParameters& p, const Tensor4& x, Rng* rng,
                    ForwardTape* tape, ModelParameters* running) {
  check_input(cfg, x);
  const bool training = tape != nullptr;
  const int stages = static_cast<int>(cfg.stage_widths.size());
  const int k_convs = cfg.convs_per_stage;

  auto block = [&](const std::string& prefix, std::shared_ptr<const Tensor4> in, bool up,
                   ForwardTape::Block* rec) -> std::shared_ptr<const Tensor4> {
    Tensor4 z = block_conv(p, prefix, *in, up);
    if (rec) rec->input = in;
    const BnRefs bn = bn_refs(p, prefix);
    return std::make_shared<const Tensor4>(training ? bn_relu_train(std::move(z), bn, running, prefix, rec)
                                                    : bn_relu_eval(std::move(z), bn));
  };

  if (tape) {
    *tape = ForwardTape{};
    tape->encoder.resize(static_cast<std::size_t>(stages));
    tape->dropout_scale.resize(static_cast<std::size_t>(stages - 1));
    tape->pools.resize(static_cast<std::size_t>(stages - 1));
    tape->up.resize(static_cast<std::size_t>(stages - 1));
    tape->decoder.resize(static_cast<std::size_t>(stages - 1));
  }

  std::vector<std::shared_ptr<const Tensor4>> skips(static_cast<std::size_t>(stages - 1));
  auto h = std::make_shared<const Tensor4>(x);
  for (int s = 0; s < stages; ++s) {
    if (tape) tape->encoder[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(k_convs));
    for (int k = 0; k < k_convs; ++k) {
      h = block(enc_name(s, k), h, false, tape ? &tape->encoder[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] : nullptr);
    }
    if (s == stages - 1) break;
    if (training && cfg.dropout_rate > 0.0) {
      Tensor4 d = *h;
      std::bernoulli_distribution keep(1.0 - cfg.dropout_rate);
      std::vector<double> scale(static_cast<std::size_t>(d.n) * d.c);
      for (auto& v : scale) v = keep(*rng) ? 1.0 / (1.0 - cfg.dropout_rate) : 0.0;
      for (std::size_t pc = 0; pc < scale.size(); ++pc) {
        double* plane = d.data.data() + pc * d.plane_size();
        for (std::size_t i = 0; i < d.plane_size(); ++i) plane[i] *= scale[pc];
      }
      tape->dropout_scale[static_cast<std::size_t>(s)] = std::move(scale);
      h = std::make_shared<const Tensor4>(std::move(d));
    }
    skips[static_cast<std::size_t>(s)] = h;
    h = std::make_shared<const Tensor4>(max_pool(*h, tape ? &tape->pools[static_cast<std::size_t>(s)] : nullptr));
  }

  for (int s = stages - 2; s >= 0; --s) {
    const auto si = static_cast<std::size_t>(s);
    auto u = block(up_name(s), h, true, tape ? &tape->up[si] : nullptr);
    h = std::make_shared<const Tensor4>(concat_channels(*u, *skips[si]));
    if (tape) tape->decoder[si].resize(static_cast<std::size_t>(k_convs));
    for (int k = 0; k < k_convs; ++k) {
      h = block(dec_name(s, k), h, false, tape ? &tape->decoder[si][static_cast<std::size_t>(k)] : nullptr);
    }
  }

  const ParamTensor& hw = p.at("head.weight");
  const double bias = p.at("head.bias").value[0];
  Tensor4 out;
  kernels::conv3x3_forward(*h, hw.value, 1, out);
  for (double& v : out.data) v = sigmoid(v + bias);
  if (tape) {
    tape->head_input = h;
    tape->output = out;
  }
  return out;
}

}  // namespace

SegmentationNet::SegmentationNet(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  declare_parameters();
}

void SegmentationNet::declare_parameters() {
  const auto& widths = config_.stage_widths;
  const int stages = static_cast<int>(widths.size());
  auto conv_block = [&](const std::string& prefix, std::vector<int> wshape, int out) {
    params_.add(prefix + ".weight", std::move(wshape), true);
    params_.add(prefix + ".bn.gamma", {out}, true);
    params_.add(prefix + ".bn.beta", {out}, true);
    params_.add(prefix + ".bn.running_mean", {out}, false);
    params_.add(prefix + ".bn.running_var", {out}, false);
  };
  int in = NetworkConfig::kInputChannels;
  for (int s = 0; s < stages; ++s) {
    for (int k = 0; k < config_.convs_per_stage; ++k) {
      conv_block(enc_name(s, k), {widths[s], in, 3, 3}, widths[s]);
      in = widths[s];
    }
  }
  for (int s = stages - 2; s >= 0; --s) {
    conv_block(up_name(s), {widths[s + 1], widths[s], 3, 3}, widths[s]);
    in = 2 * widths[s];
    for (int k = 0; k < config_.convs_per_stage; ++k) {
      conv_block(dec_name(s, k), {widths[s], in, 3, 3}, widths[s]);
      in = widths[s];
    }
  }
  params_.add("head.weight", {1, widths[0], 3, 3}, true);
  params_.add("head.bias", {1}, true);
}

SegmentationNet SegmentationNet::empty(const NetworkConfig& config) { return SegmentationNet(config); }

SegmentationNet SegmentationNet::build(const NetworkConfig& config, std::uint64_t seed) {
  SegmentationNet net(config);
  Rng rng(seed);
  for (auto& t : net.params_.tensors()) {
    const std::string& name = t.name;
    auto ends_with = [&](std::string_view suffix) {
      return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".weight")) {
      // fan-in: input channels x 3 x 3 (dim 1 for convolutions, dim 0 for up-convolutions)
      const bool up = name.find(".up.") != std::string::npos;
      const int fan_in = (up ? t.shape[0] : t.shape[1]) * 9;
      const double gain = name == "head.weight" ? 3.0 : 6.0;
      std::uniform_real_distribution<double> dist(-std::sqrt(gain / fan_in), std::sqrt(gain / fan_in));
      for (double& v : t.value) v = dist(rng);
    } else if (ends_with(".gamma") || ends_with(".running_var")) {
      std::fill(t.value.begin(), t.value.end(), 1.0);
    } else {
      std::fill(t.value.begin(), t.value.end(), 0.0);
    }
  }
  return net;
}

Tensor4 SegmentationNet::predict(const Tensor4& x) const {
  return run_forward(config_, params_, x, nullptr, nullptr, nullptr);
}

Tensor4 SegmentationNet::forward_train(const Tensor4& x, Rng& rng, ForwardTape& tape, bool update_running_stats) {
  return run_forward(config_, params_, x, &rng, &tape, update_running_stats ? &params_ : nullptr);
}

void SegmentationNet::backward(const ForwardTape& tape, const Tensor4& grad_output) {
  if (!grad_output.same_shape(tape.output)) throw Error(Errc::ShapeMismatch, "output gradient shape");
  const int stages = static_cast<int>(config_.stage_widths.size());
  const int k_convs = config_.convs_per_stage;

  // Through the sigmoid (clamped outputs still use s(1-s)).
  Tensor4 dz = grad_output;
  double dbias = 0.0;
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const double s = tape.output.data[i];
    dz.data[i] *= s * (1.0 - s);
    dbias += dz.data[i];
  }
  params_.at("head.bias").grad[0] += dbias;
  ParamTensor& hw = params_.at("head.weight");
  Tensor4 grad;
  kernels::conv3x3_backward(*tape.head_input, hw.value, dz, &grad, hw.grad);

  std::vector<Tensor4> skip_grads(static_cast<std::size_t>(stages - 1));
  for (int s = 0; s <= stages - 2; ++s) {
    const auto si = static_cast<std::size_t>(s);
    for (int k = k_convs - 1; k >= 0; --k) {
      grad = block_backward(params_, dec_name(s, k), tape.decoder[si][static_cast<std::size_t>(k)], grad, false, true);
    }
    auto [du, dskip] = split_channels(grad, config_.stage_widths[si]);
    skip_grads[si] = std::move(dskip);
    grad = block_backward(params_, up_name(s), tape.up[si], du, true, true);
  }

  for (int s = stages - 1; s >= 0; --s) {
    const auto si = static_cast<std::size_t>(s);
    if (s < stages - 1) {
      grad = max_unpool(grad, tape.pools[si]);
      const Tensor4& sg = skip_grads[si];
      for (std::size_t i = 0; i < grad.size(); ++i) grad.data[i] += sg.data[i];
      const auto& scale = tape.dropout_scale[si];
      if (!scale.empty()) {
        for (std::size_t pc = 0; pc < scale.size(); ++pc) {
          double* plane = grad.data.data() + pc * grad.plane_size();
          for (std::size_t i = 0; i < grad.plane_size(); ++i) plane[i] *= scale[pc];
        }
      }
    }
    for (int k = k_convs - 1; k >= 0; --k) {
      const bool first_layer = s == 0 && k == 0;
      grad = block_backward(params_, enc_name(s, k), tape.encoder[si][static_cast<std::size_t>(k)], grad, false,
                            !first_layer);
    }
  }
}

ProbabilityMap SegmentationNet::forward(const NetworkInput& input, bool training, Rng* rng) {
  const Tensor4 x = to_batch(std::span<const NetworkInput>(&input, 1));
  if (training) {
    Rng fallback(0);
    ForwardTape tape;
    return output_map(forward_train(x, rng ? *rng : fallback, tape), 0);
  }
  return output_map(predict(x), 0);
}

Tensor4 to_batch(std::span<const NetworkInput> inputs) {
  if (inputs.empty()) throw Error(Errc::EmptySequence, "empty batch");
  const Shape2 shape = inputs.front().shape();
  Tensor4 x(static_cast<int>(inputs.size()), NetworkInput::kChannels, shape.height, shape.width);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].shape() != shape) throw Error(Errc::ShapeMismatch, "batch inputs differ in shape");
    std::copy(inputs[i].data().begin(), inputs[i].data().end(), x.sample(static_cast<int>(i)).begin());
  }
  return x;
}

ProbabilityMap output_map(const Tensor4& output, int sample) {
  if (output.c != 1) throw Error(Errc::ShapeMismatch, "network output must have one channel");
  auto s = output.sample(sample);
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(Errc::NumericalFailure, "network output is not finite");
  }
  return ProbabilityMap(output.h, output.w, std::vector<double>(s.begin(), s.end()));
}

std::pair<NetworkInput, CropRecord> pad_for_network(const NetworkInput& input, int stages) {
  if (stages < 0 || stages > 12) throw Error(Errc::InvalidConfig, "pooling stage count");
  const int m = 1 << stages;
  const Shape2 orig = input.shape();
  const Shape2 padded{(orig.height + m - 1) / m * m, (orig.width + m - 1) / m * m};
  if (padded == orig) return {input, CropRecord{orig, padded}};
  std::vector<double> planes(static_cast<std::size_t>(padded.height) * padded.width * NetworkInput::kChannels);
  for (int c = 0; c < NetworkInput::kChannels; ++c) {
    for (int y = 0; y < padded.height; ++y) {
      const int sy = std::min(y, orig.height - 1);
      for (int x = 0; x < padded.width; ++x) {
        const int sx = std::min(x, orig.width - 1);
        planes[(static_cast<std::size_t>(c) * padded.height + y) * padded.width + x] = input.at(c, sy, sx);
      }
    }
  }
  return {NetworkInput(padded.height, padded.width, std::move(planes)), CropRecord{orig, padded}};
}

ProbabilityMap crop_to_original(const ProbabilityMap& map, const CropRecord& record) {
  if (map.shape() != record.padded) throw Error(Errc::ShapeMismatch, "map does not match the padded shape");
  if (record.original == record.padded) return map;
  std::vector<double> v(static_cast<std::size_t>(record.original.height) * record.original.width);
  for (int y = 0; y < record.original.height; ++y) {
    for (int x = 0; x < record.original.width; ++x) {
      v[static_cast<std::size_t>(y) * record.original.width + x] = map.at(y, x);
    }
  }
  return ProbabilityMap(record.original.height, record.original.width, std::move(v));
}

BinaryMask binarize(const ProbabilityMap& output, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(Errc::InvalidConfig, "threshold must lie in (0,1)");
  std::vector<std::uint8_t> v(output.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = output[i] > theta ? 1 : 0;
  return BinaryMask(output.height(), output.width(), std::move(v));
}

}  // namespace bsuv
