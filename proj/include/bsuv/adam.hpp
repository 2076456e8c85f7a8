#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bsuv/network.hpp"

namespace bsuv {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moments per trainable tensor, in ModelParameters order.
struct AdamState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update of `params` in place. `step` is the
/// 1-based index of this update. Throws ShapeMismatch.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::int64_t step, const AdamConfig& config);

/// Updates every trainable tensor from its accumulated gradient and
/// increments state.step.
void adam_step(ModelParameters& params, AdamState& state, const AdamConfig& config);

}  // namespace bsuv
