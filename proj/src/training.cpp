#include "bsuv/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "bsuv/checkpoint.hpp"
#include "bsuv/error.hpp"
#include "bsuv/input.hpp"

namespace bsuv {

namespace {

Rng derive_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kSampleStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace

std::vector<int> AblationFlags::zeroed_channels() const {
  std::vector<int> out;
  if (!use_recent_bg) {
    for (int c = 0; c < 3; ++c) out.push_back(ChannelOrder::rgb(Slot::Recent, c));
    out.push_back(ChannelOrder::fpm(Slot::Recent));
  }
  if (!use_empty_bg) {
    for (int c = 0; c < 3; ++c) out.push_back(ChannelOrder::rgb(Slot::Empty, c));
    out.push_back(ChannelOrder::fpm(Slot::Empty));
  }
  if (!use_fpm) {
    for (Slot s : {Slot::Current, Slot::Recent, Slot::Empty}) out.push_back(ChannelOrder::fpm(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string AblationFlags::label() const {
  std::string s = "C";
  if (use_empty_bg) s += "+E";
  if (use_recent_bg) s += "+R";
  if (use_fpm) s += "+FPM";
  if (use_illumination_aug) s += "+aug";
  return s;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw Error(Errc::InvalidConfig, "beta1 and beta2 must lie in [0,1)");
  }
  if (!(epsilon > 0)) throw Error(Errc::InvalidConfig, "epsilon must be positive");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be positive");
  if (epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be positive");
  if (frames_per_video < 1) throw Error(Errc::InvalidConfig, "frames_per_video must be positive");
  augmentation.validate();
  loss.validate();
}

std::vector<int> select_training_frames(const VideoDescriptor& video, int n, const std::vector<int>* manifest) {
  const TemporalRoi roi = video.temporal_roi;
  if (manifest) {
    for (int t : *manifest) {
      if (t < roi.first || t > roi.last) {
        throw Error(Errc::IndexOutOfRange, fmt::format("{}/{}: manifest frame {} outside labeled range {}..{}",
                                                       video.category, video.video, t, roi.first, roi.last));
      }
    }
    return *manifest;
  }
  if (n < 1) throw Error(Errc::InvalidConfig, "frame count must be positive");
  const int count = roi.last - roi.first + 1;
  if (n > count) {
    throw Error(Errc::NotEnoughLabeledFrames,
                fmt::format("{}/{}: {} labeled frames, {} requested", video.category, video.video, count, n));
  }
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[i] = roi.first + static_cast<int>(static_cast<std::int64_t>(i) * count / n);
  }
  return out;
}

std::pair<NetworkInput, LabelMap> prepare_example(const TrainingExample& ex, const TrainConfig& config, Rng& rng) {
  const Shape2 shape = ex.current.shape();
  for (Shape2 s : {ex.recent_bg.shape(), ex.empty_bg.shape(), ex.current_fpm.shape(), ex.recent_fpm.shape(),
                   ex.empty_fpm.shape(), ex.labels.shape()}) {
    if (s != shape) throw Error(Errc::ShapeMismatch, "training example components differ in shape");
  }
  const CropWindow w = sample_crop_window(shape, config.augmentation.crop_size, rng);
  ColorFrame current = crop(ex.current, w);
  ColorFrame recent = crop(ex.recent_bg, w);
  ColorFrame empty = crop(ex.empty_bg, w);

  if (config.ablation.use_illumination_aug) {
    const SlotShifts shifts = sample_slot_shifts(rng, config.augmentation);
    current = apply_illumination(current, shifts.current);
    recent = apply_illumination(recent, shifts.recent);
    empty = apply_illumination(empty, shifts.empty);
    current = add_pixel_noise(current, rng, config.augmentation.sigma_noise);
    recent = add_pixel_noise(recent, rng, config.augmentation.sigma_noise);
    empty = add_pixel_noise(empty, rng, config.augmentation.sigma_noise);
  }

  NetworkInput input = assemble_input(current, crop(ex.current_fpm, w), recent, crop(ex.recent_fpm, w), empty,
                                      crop(ex.empty_fpm, w));
  const auto zeroed = config.ablation.zeroed_channels();
  if (!zeroed.empty()) input = input.with_channels_zeroed(zeroed);
  return {std::move(input), crop(ex.labels, w)};
}

std::int64_t steps_per_epoch(std::size_t examples, int batch_size) {
  return static_cast<std::int64_t>((examples + batch_size - 1) / batch_size);
}

double train_step(SegmentationNet& net, AdamState& state, const TrainConfig& config, const Tensor4& batch,
                  std::span<const LossTarget> targets, Rng& rng, Tensor4* output) {
  if (static_cast<int>(targets.size()) != batch.n) {
    throw Error(Errc::ShapeMismatch, "one loss target per batch sample required");
  }
  net.parameters().zero_grad();
  ForwardTape tape;
  Tensor4 out = net.forward_train(batch, rng, tape);
  Tensor4 grad(out.n, out.c, out.h, out.w);
  double loss = 0.0;
  for (int b = 0; b < out.n; ++b) {
    const ProbabilityMap p = output_map(out, b);
    const LossTarget& t = targets[static_cast<std::size_t>(b)];
    loss += jaccard_loss(t.truth, p, config.loss.smoothing, &t.valid);
    const auto g = jaccard_loss_gradient(t.truth, p, config.loss.smoothing, &t.valid);
    auto dst = grad.sample(b);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = g[i] / out.n;
  }
  loss /= out.n;
  if (!std::isfinite(loss)) throw Error(Errc::NumericalFailure, "batch loss is not finite");
  net.backward(tape, grad);
  adam_step(net.parameters(), state, config.adam());
  if (output) *output = std::move(out);
  return loss;
}

TrainResult train(const ExampleSource& source, const TrainConfig& config, const NetworkConfig& net_config,
                  const TrainOptions& options) {
  config.validate();
  net_config.validate();
  if (source.size() == 0) throw Error(Errc::InvalidConfig, "no training examples");

  TrainResult result{SegmentationNet::build(net_config, config.seed), {}, {}};
  AdamState state;

  std::ofstream log;
  if (!options.output_dir.empty()) {
    fs::create_directories(options.output_dir);
    const fs::path log_path = options.output_dir / "train_log.csv";
    const bool fresh = !fs::exists(log_path) || fs::file_size(log_path) == 0;
    log.open(log_path, std::ios::app);
    if (!log) throw Error(Errc::Io, "cannot open " + log_path.string());
    if (fresh) log << "step,epoch,loss,timestamp\n";
  }

  const std::size_t n = source.size();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  double best = std::numeric_limits<double>::infinity();
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = derive_rng({config.seed, kShuffleStream, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_sum = 0.0;
    int epoch_steps = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);
      std::vector<NetworkInput> inputs(count);
      std::vector<LossTarget> targets(count);
      std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
      for (std::size_t i = 0; i < count; ++i) {
        try {
          const TrainingExample ex = source.load(order[start + i]);
          Rng rng = derive_rng({config.seed, kSampleStream, static_cast<std::uint64_t>(epoch), start + i});
          auto [input, labels] = prepare_example(ex, config, rng);
          inputs[i] = std::move(input);
          targets[i] = make_loss_target(labels, config.loss.loss_masking);
        } catch (...) {
#pragma omp critical(bsuv_train_failure)
          if (!failure) failure = std::current_exception();
        }
      }
      if (failure) std::rethrow_exception(failure);

      const Tensor4 batch = to_batch(inputs);
      Rng dropout_rng = derive_rng({config.seed, kDropoutStream, static_cast<std::uint64_t>(step + 1)});
      const double loss = train_step(result.net, state, config, batch, targets, dropout_rng);
      ++step;
      const StepRecord rec{step, epoch, loss};
      result.steps.push_back(rec);
      epoch_sum += loss;
      ++epoch_steps;
      if (log.is_open()) log << fmt::format("{},{},{:.10g},{}\n", step, epoch, loss, utc_timestamp()) << std::flush;
      if (options.on_step) options.on_step(rec);
    }

    const double epoch_loss = epoch_sum / epoch_steps;
    result.epoch_losses.push_back(epoch_loss);
    if (!options.output_dir.empty()) {
      save_checkpoint(options.output_dir / "last.ckpt", result.net, step);
      if (epoch_loss < best) save_checkpoint(options.output_dir / "best.ckpt", result.net, step);
    }
    best = std::min(best, epoch_loss);
  }
  return result;
}

double mask_f1(const BinaryMask& pred, const LossTarget& target) {
  if (pred.shape() != target.truth.shape()) throw Error(Errc::ShapeMismatch, "prediction and target differ");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!target.valid[i]) continue;
    const bool p = pred[i] != 0, y = target.truth[i] != 0;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  // Nothing to find and nothing reported counts as a perfect score here.
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

OverfitResult overfit_one_batch(SegmentationNet& net, const TrainConfig& config, const NetworkInput& input,
                                const LabelMap& labels, int max_steps, double target_f1) {
  const NetworkInput inputs[] = {input};
  const Tensor4 batch = to_batch(inputs);
  const LossTarget targets[] = {make_loss_target(labels, config.loss.loss_masking)};
  AdamState state;
  Rng rng = derive_rng({config.seed, kDropoutStream});
  OverfitResult r;
  Tensor4 out;
  for (int s = 1; s <= max_steps; ++s) {
    r.final_loss = train_step(net, state, config, batch, targets, rng, &out);
    r.steps = s;
    r.train_f1 = mask_f1(binarize(output_map(out, 0)), targets[0]);
    if (r.train_f1 >= target_f1) {
      r.reached = true;
      break;
    }
  }
  r.eval_f1 = mask_f1(binarize(output_map(net.predict(batch), 0)), targets[0]);
  return r;
}

}  // namespace bsuv
