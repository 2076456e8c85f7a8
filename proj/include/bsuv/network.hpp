#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bsuv/tensor.hpp"
#include "bsuv/types.hpp"

namespace bsuv {

using Rng = std::mt19937_64;

struct NetworkConfig {
  static constexpr int kKernelSize = 3;
  static constexpr int kPoolSize = 2;
  static constexpr int kInputChannels = 12;

  std::vector<int> stage_widths{64, 128, 256, 512};
  int convs_per_stage = 2;
  double dropout_rate = 0.25;

  /// Throws InvalidConfig.
  void validate() const;
  int pooling_steps() const { return static_cast<int>(stage_widths.size()) - 1; }
  /// Input height and width must be multiples of this.
  int spatial_multiple() const { return 1 << pooling_steps(); }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty for buffers
  bool trainable = true;

  std::size_t numel() const { return value.size(); }
};

/// Named parameters (weights, batch-norm affine terms) and buffers (batch-norm
/// running statistics) in a stable construction order.
class ModelParameters {
 public:
  ParamTensor& add(std::string name, std::vector<int> shape, bool trainable);

  ParamTensor& at(const std::string& name);
  const ParamTensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<ParamTensor>& tensors() noexcept { return tensors_; }
  const std::vector<ParamTensor>& tensors() const noexcept { return tensors_; }

  /// Scalar count over trainable tensors.
  std::size_t trainable_count() const;
  void zero_grad();

 private:
  std::vector<ParamTensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

/// Intermediate activations of one training-mode forward pass.
struct ForwardTape;

/// Fully-convolutional encoder-decoder:
///   encoder stage = convs_per_stage x (3x3 conv -> BN -> ReLU),
///                   then spatial dropout and 2x2 max-pool (all but the last stage)
///   decoder stage = stride-2 3x3 up-convolution -> BN -> ReLU, concatenation
///                   with the matching encoder activation, convs_per_stage x
///                   (3x3 conv -> BN -> ReLU)
///   head          = 3x3 conv to one channel + sigmoid
class SegmentationNet {
 public:
  static constexpr double kBnEpsilon = 1e-5;
  static constexpr double kBnMomentum = 0.1;
  static constexpr double kOutputFloor = 1e-12;

  /// Deterministic fan-in-scaled uniform initialization.
  static SegmentationNet build(const NetworkConfig& config, std::uint64_t seed);
  /// Parameters with the layout of `config`, values uninitialized (zero).
  static SegmentationNet empty(const NetworkConfig& config);

  const NetworkConfig& config() const noexcept { return config_; }
  ModelParameters& parameters() noexcept { return params_; }
  const ModelParameters& parameters() const noexcept { return params_; }

  /// Evaluation mode: running batch-norm statistics, no dropout. Const and
  /// safe to call concurrently.
  Tensor4 predict(const Tensor4& x) const;

  /// Training mode: batch statistics (running statistics updated when
  /// update_running_stats), spatial dropout drawn from rng. Records the tape
  /// needed by backward().
  Tensor4 forward_train(const Tensor4& x, Rng& rng, ForwardTape& tape, bool update_running_stats = true);

  /// Accumulates parameter gradients given dLoss/dOutput (output = sigmoid).
  void backward(const ForwardTape& tape, const Tensor4& grad_output);

  /// Single-input convenience wrapper. Throws ShapeNotPoolable.
  ProbabilityMap forward(const NetworkInput& input, bool training, Rng* rng = nullptr);

 private:
  explicit SegmentationNet(NetworkConfig config);
  void declare_parameters();

  NetworkConfig config_;
  ModelParameters params_;
};

struct ForwardTape {
  struct Block {
    std::shared_ptr<const Tensor4> input;
    Tensor4 xhat;
    std::vector<double> inv_std;
  };
  struct Pool {
    std::vector<std::uint8_t> argmax;
    int in_h = 0, in_w = 0;
  };
  std::vector<std::vector<Block>> encoder;  // [stage][conv]
  std::vector<std::vector<double>> dropout_scale;  // [stage][n * c]
  std::vector<Pool> pools;
  std::vector<Block> up;  // per decoder stage
  std::vector<std::vector<Block>> decoder;
  std::vector<int> skip_channels;
  std::shared_ptr<const Tensor4> head_input;
  Tensor4 output;
};

/// Stacks inputs into an (n, 12, h, w) batch. Throws ShapeMismatch.
Tensor4 to_batch(std::span<const NetworkInput> inputs);
/// Throws NumericalFailure on a non-finite value.
ProbabilityMap output_map(const Tensor4& output, int sample);

struct CropRecord {
  Shape2 original;
  Shape2 padded;
};

/// Pads height and width up to multiples of 2^stages by edge replication
/// (bottom and right edges).
std::pair<NetworkInput, CropRecord> pad_for_network(const NetworkInput& input, int stages);
ProbabilityMap crop_to_original(const ProbabilityMap& map, const CropRecord& record);

/// 1 iff value > theta.
BinaryMask binarize(const ProbabilityMap& output, double theta = 0.5);

}  // namespace bsuv
