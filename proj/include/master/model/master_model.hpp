#pragma once

#include <span>

#include "master/market_data/panel.hpp"
#include "master/model/config.hpp"
#include "master/model/params.hpp"
#include "master/numerics/tensor.hpp"

namespace master::model {

struct GateResult {
  nn::Tensor gated;  // [M, tau, F]
  nn::Tensor alpha;  // [F]
};

struct StageResult {
  nn::Tensor output;     // [M, tau, D]
  nn::Tensor attention;  // detached; intra [M, N1, tau, tau], inter [tau, N2, M, M]
};

struct TemporalResult {
  nn::Tensor embedding;  // [M, D]
  nn::Tensor weights;    // [M, tau], detached
};

struct ModelOutput {
  nn::Tensor prediction;        // [M], attached to the graph
  nn::Tensor alpha;             // [F]
  nn::Tensor intra_attention;   // [M, N1, tau, tau]
  nn::Tensor inter_attention;   // [tau, N2, M, M]
  nn::Tensor temporal_weights;  // [M, tau]
  nn::Tensor embedding;         // [M, D], detached
};

// alpha = F * softmax(W m + b, beta); features scaled per last axis.
GateResult gate(const nn::Tensor& features, std::span<const double> market,
                const ModelParams& params, const ModelConfig& config);

// Per stock: Y = LN(f(x) + PE), H = FFN(MHA(Y) + Y).
StageResult intra_aggregate(const nn::Tensor& gated, const ModelParams& params,
                            const ModelConfig& config);

// Per time step: Z_t = FFN(MHA(H_t) + H_t) across stocks. With the
// inter-stock ablation Z = H and every map is the identity.
StageResult inter_aggregate(const nn::Tensor& local, const ModelParams& params,
                            const ModelConfig& config);

// Bilinear attention over time queried by the last step.
TemporalResult temporal_aggregate(const nn::Tensor& temporal, const nn::Tensor& weight);

nn::Tensor predict(const nn::Tensor& embedding, const ModelParams& params);

ModelOutput forward(const nn::Tensor& features, std::span<const double> market,
                    const ModelParams& params, const ModelConfig& config);
ModelOutput forward(const data::SampleWindow& window, const ModelParams& params,
                    const ModelConfig& config);

}  // namespace master::model
