#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsuv/adam.hpp"
#include "bsuv/augment.hpp"
#include "bsuv/loss.hpp"
#include "bsuv/network.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

namespace fs = std::filesystem;

/// Input-slot toggles. A disabled slot has its channels zeroed in every batch.
struct AblationFlags {
  bool use_empty_bg = true;
  bool use_recent_bg = true;
  bool use_fpm = true;
  bool use_illumination_aug = true;

  std::vector<int> zeroed_channels() const;
  /// Short row label, e.g. "E+R+FPM+aug" or "current".
  std::string label() const;
  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  int batch_size = 8;
  int epochs = 50;
  int frames_per_video = 200;
  std::uint64_t seed = 0;
  AblationFlags ablation;
  AugmentationConfig augmentation;
  LossConfig loss;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Training frame indices for one video. Manifest entries are returned as
/// given (each must lie in the temporal ROI); otherwise n frames uniformly
/// spaced over the ROI: first + floor(i * count / n). Throws
/// NotEnoughLabeledFrames or IndexOutOfRange.
std::vector<int> select_training_frames(const VideoDescriptor& video, int n,
                                        const std::vector<int>* manifest = nullptr);

/// Everything one training sample is built from, at native resolution.
struct TrainingExample {
  ColorFrame current, recent_bg, empty_bg;
  ProbabilityMap current_fpm, recent_fpm, empty_fpm;
  LabelMap labels;
};

class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t size() const = 0;
  /// Must be safe to call concurrently.
  virtual TrainingExample load(std::size_t index) const = 0;
};

class InMemorySource final : public ExampleSource {
 public:
  explicit InMemorySource(std::vector<TrainingExample> examples) : examples_(std::move(examples)) {}
  std::size_t size() const override { return examples_.size(); }
  TrainingExample load(std::size_t index) const override { return examples_.at(index); }

 private:
  std::vector<TrainingExample> examples_;
};

/// Crop, illumination shift (when enabled), pixel noise, assembly and channel
/// ablation for one example. All randomness comes from `rng`.
std::pair<NetworkInput, LabelMap> prepare_example(const TrainingExample& example, const TrainConfig& config,
                                                  Rng& rng);

struct StepRecord {
  std::int64_t step = 0;  // 1-based optimizer step
  int epoch = 0;          // 1-based
  double loss = 0.0;      // mean per-sample loss of the batch
};

struct TrainOptions {
  /// Checkpoints (last.ckpt, best.ckpt) and train_log.csv go here; nothing is
  /// written when empty.
  fs::path output_dir;
  std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
  SegmentationNet net;
  std::vector<StepRecord> steps;
  std::vector<double> epoch_losses;
};

std::int64_t steps_per_epoch(std::size_t examples, int batch_size);

/// Mini-batch Adam on the relaxed Jaccard loss. Each epoch visits every
/// example once in a shuffled order; the last batch may be partial. Throws
/// NumericalFailure when a batch loss is not finite.
TrainResult train(const ExampleSource& source, const TrainConfig& config, const NetworkConfig& net_config,
                  const TrainOptions& options = {});

/// One optimizer step on a fixed batch; returns the batch loss and fills
/// `output` with the training-mode prediction.
double train_step(SegmentationNet& net, AdamState& state, const TrainConfig& config, const Tensor4& batch,
                  std::span<const LossTarget> targets, Rng& rng, Tensor4* output = nullptr);

struct OverfitResult {
  int steps = 0;
  double final_loss = 0.0;
  double train_f1 = 0.0;  // training-mode prediction at theta = 0.5
  double eval_f1 = 0.0;   // evaluation-mode prediction at theta = 0.5
  bool reached = false;
};

/// Repeats train_step on one fixed input until the training-mode F1 reaches
/// `target_f1` or `max_steps` is hit.
OverfitResult overfit_one_batch(SegmentationNet& net, const TrainConfig& config, const NetworkInput& input,
                                const LabelMap& labels, int max_steps, double target_f1);

/// F1 of a thresholded prediction against a loss target (valid pixels only).
double mask_f1(const BinaryMask& pred, const LossTarget& target);

}  // namespace bsuv
