#include "master/training/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace master::train {

double grad_norm(std::span<const nn::NamedTensor> params) {
  double sq = 0.0;
  for (const auto& p : params)
    if (p.tensor.has_grad())
      for (double g : p.tensor.grad()) sq += g * g;
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<const nn::NamedTensor> params, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_grad_norm: max_norm must be positive");
  const double norm = grad_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (const auto& p : params) {
      if (!p.tensor.has_grad()) continue;
      nn::Tensor handle = p.tensor;
      for (double& g : handle.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

void optimizer_step(std::span<const nn::NamedTensor> params, OptimizerState& state,
                    const AdamConfig& config) {
  if (!(config.lr > 0.0)) throw std::invalid_argument("optimizer: lr must be positive");
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad())
      if (!std::isfinite(g)) throw nn::NonFiniteError("optimizer: non-finite gradient in " + p.name);
  }
  if (config.clip_norm > 0.0) clip_grad_norm(params, config.clip_norm);
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.tensor.size(), 0.0);
      state.second.emplace_back(p.tensor.size(), 0.0);
    }
  }
  if (state.first.size() != params.size()) {
    throw std::invalid_argument("optimizer: state does not match the parameter list");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].tensor.has_grad()) continue;
    nn::Tensor handle = params[i].tensor;
    const auto grad = handle.grad();
    auto values = handle.mutable_values();
    auto& m = state.first[i];
    auto& v = state.second[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * grad[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * grad[j] * grad[j];
      values[j] -= config.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.eps);
    }
  }
}

}  // namespace master::train
