#include "bsuv/adam.hpp"

#include <cmath>

#include "bsuv/error.hpp"

namespace bsuv {

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 std::int64_t step, const AdamConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error(Errc::ShapeMismatch, "adam buffers differ in size from the parameters");
  }
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grads[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    params[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
  }
}

void adam_step(ModelParameters& params, AdamState& state, const AdamConfig& config) {
  auto& tensors = params.tensors();
  if (state.m.empty()) {
    state.m.resize(tensors.size());
    state.v.resize(tensors.size());
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (!tensors[i].trainable) continue;
      state.m[i].assign(tensors[i].numel(), 0.0);
      state.v[i].assign(tensors[i].numel(), 0.0);
    }
  }
  if (state.m.size() != tensors.size()) throw Error(Errc::ShapeMismatch, "adam state does not match the model");
  ++state.step;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& t = tensors[i];
    if (!t.trainable) continue;
    adam_update(t.value, t.grad, state.m[i], state.v[i], state.step, config);
  }
}

}  // namespace bsuv
