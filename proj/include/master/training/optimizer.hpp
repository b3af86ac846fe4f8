#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "master/numerics/grad_check.hpp"

namespace master::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global-norm clip; 0 disables
};

struct OptimizerState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;
};

// Scales every gradient so the global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(std::span<const nn::NamedTensor> params, double max_norm);
double grad_norm(std::span<const nn::NamedTensor> params);

// One bias-corrected adaptive-moment update using the populated gradients.
// A non-finite gradient throws nn::NonFiniteError before anything changes.
void optimizer_step(std::span<const nn::NamedTensor> params, OptimizerState& state,
                    const AdamConfig& config);

}  // namespace master::train
