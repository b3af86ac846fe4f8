#pragma once

#include <cstdint>
#include <vector>

#include "master/model/config.hpp"
#include "master/numerics/attention.hpp"
#include "master/numerics/grad_check.hpp"

namespace master::model {

struct ModelParams {
  nn::Tensor gate_weight;       // [F', F]
  nn::Tensor gate_bias;         // [F]
  nn::Tensor encoder_weight;    // [F, D]
  nn::Tensor encoder_bias;      // [D]
  nn::Tensor norm_gain;         // [D]
  nn::Tensor norm_bias;         // [D]
  nn::AttentionWeights intra;
  nn::FeedForwardWeights intra_ffn;
  nn::AttentionWeights inter;
  nn::FeedForwardWeights inter_ffn;
  nn::Tensor temporal_weight;   // [D, D]
  nn::Tensor predictor_weight;  // [D, 1]
  nn::Tensor predictor_bias;    // [1]

  // Xavier-uniform weights, zero biases, unit gain, zero temporal weight.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  // Every array zero except the layer-norm gain, which is one.
  static ModelParams zeros(const ModelConfig& config);

  // Every array in the fixed serialization order. Handles share storage.
  std::vector<nn::NamedTensor> named() const;
  void zero_grad();
  // Independent copy with no graph history.
  ModelParams clone() const;
  // Throws ConfigError when an array's shape disagrees with `config`.
  void check_shapes(const ModelConfig& config) const;
};

}  // namespace master::model
