#include "master/model/master_model.hpp"

#include <cmath>
#include <string>

#include "master/numerics/attention.hpp"
#include "master/numerics/flops.hpp"
#include "master/numerics/ops.hpp"

namespace master::model {

namespace {

void check_features(const nn::Tensor& x, const ModelConfig& config) {
  if (x.rank() != 3 || x.dim(1) != config.lookback || x.dim(2) != config.num_features ||
      x.dim(0) == 0) {
    throw nn::ShapeError("model: features of shape " + nn::to_string(x.shape()) +
                         " do not match [M, " + std::to_string(config.lookback) + ", " +
                         std::to_string(config.num_features) + "]");
  }
}

}  // namespace

GateResult gate(const nn::Tensor& features, std::span<const double> market,
                const ModelParams& params, const ModelConfig& config) {
  nn::FlopScope scope("gating");
  const std::size_t f = config.num_features;
  if (config.disable_gating) {
    return {features, nn::Tensor::full({f}, 1.0)};
  }
  if (market.size() != config.market_dim) {
    throw nn::ShapeError("gate: market status has " + std::to_string(market.size()) +
                         " entries, config expects " + std::to_string(config.market_dim));
  }
  for (double v : market)
    if (!std::isfinite(v)) throw nn::NonFiniteError("gate: non-finite market status entry");
  nn::Tensor m({1, market.size()}, std::vector<double>(market.begin(), market.end()));
  nn::Tensor logits = nn::affine(m, params.gate_weight, params.gate_bias);
  nn::Tensor alpha = nn::reshape(
      nn::scale(nn::softmax_temp(logits, config.gate_temperature), static_cast<double>(f)), {f});
  return {nn::mul(features, alpha), alpha};
}

StageResult intra_aggregate(const nn::Tensor& gated, const ModelParams& params,
                            const ModelConfig& config) {
  nn::FlopScope scope("intra_stock");
  check_features(gated, config);
  nn::Tensor encoded = nn::affine(gated, params.encoder_weight, params.encoder_bias);
  nn::Tensor y = nn::layer_norm(nn::add(encoded, nn::sinusoidal_pe(config.lookback, config.hidden)),
                                params.norm_gain, params.norm_bias);
  auto attn = nn::multi_head_attention(y, y, y, params.intra, config.intra_heads);
  return {nn::ffn_relu_residual(nn::add(attn.output, y), params.intra_ffn), attn.weights};
}

StageResult inter_aggregate(const nn::Tensor& local, const ModelParams& params,
                            const ModelConfig& config) {
  nn::FlopScope scope("inter_stock");
  if (local.rank() != 3 || local.dim(2) != config.hidden) {
    throw nn::ShapeError("inter_aggregate: input shape " + nn::to_string(local.shape()) +
                         " is not [M, tau, D]");
  }
  const std::size_t m = local.dim(0);
  const std::size_t tau = local.dim(1);
  const std::size_t heads = config.inter_heads;
  if (config.disable_inter_stock) {
    std::vector<double> eye(tau * heads * m * m, 0.0);
    for (std::size_t b = 0; b < tau * heads; ++b)
      for (std::size_t u = 0; u < m; ++u) eye[(b * m + u) * m + u] = 1.0;
    return {local, nn::Tensor({tau, heads, m, m}, std::move(eye))};
  }
  nn::Tensor by_time = nn::permute(local, {1, 0, 2});  // [tau, M, D]
  auto attn = nn::multi_head_attention(by_time, by_time, by_time, params.inter, heads,
                                       /*order_invariant=*/true);
  nn::Tensor z = nn::ffn_relu_residual(nn::add(attn.output, by_time), params.inter_ffn);
  return {nn::permute(z, {1, 0, 2}), attn.weights};
}

TemporalResult temporal_aggregate(const nn::Tensor& temporal, const nn::Tensor& weight) {
  nn::FlopScope scope("temporal");
  if (temporal.rank() != 3 || weight.rank() != 2 || weight.dim(0) != temporal.dim(2) ||
      weight.dim(1) != temporal.dim(2)) {
    throw nn::ShapeError("temporal_aggregate: shapes " + nn::to_string(temporal.shape()) +
                         " and " + nn::to_string(weight.shape()) + " do not agree");
  }
  const std::size_t m = temporal.dim(0);
  const std::size_t tau = temporal.dim(1);
  const std::size_t d = temporal.dim(2);
  // score[u, t] = z_{u,t}^T W z_{u,tau-1}
  nn::Tensor query = nn::reshape(nn::select(temporal, 1, tau - 1), {m, 1, d});
  nn::Tensor keyed = nn::matmul(temporal, weight);
  nn::Tensor scores = nn::reshape(nn::batched_matmul(keyed, query, true), {m, tau});
  nn::Tensor lambda = nn::softmax_temp(scores, 1.0);
  nn::Tensor pooled = nn::batched_matmul(nn::reshape(lambda, {m, 1, tau}), temporal);
  return {nn::reshape(pooled, {m, d}), lambda.detach()};
}

nn::Tensor predict(const nn::Tensor& embedding, const ModelParams& params) {
  nn::FlopScope scope("predict");
  nn::Tensor out = nn::affine(embedding, params.predictor_weight, params.predictor_bias);
  return nn::reshape(out, {embedding.dim(0)});
}

ModelOutput forward(const nn::Tensor& features, std::span<const double> market,
                    const ModelParams& params, const ModelConfig& config) {
  check_features(features, config);
  auto gated = gate(features, market, params, config);
  auto local = intra_aggregate(gated.gated, params, config);
  auto mixed = inter_aggregate(local.output, params, config);
  auto pooled = temporal_aggregate(mixed.output, params.temporal_weight);
  ModelOutput out;
  out.prediction = predict(pooled.embedding, params);
  out.alpha = gated.alpha.detach();
  out.intra_attention = local.attention;
  out.inter_attention = mixed.attention;
  out.temporal_weights = pooled.weights;
  out.embedding = pooled.embedding.detach();
  return out;
}

ModelOutput forward(const data::SampleWindow& window, const ModelParams& params,
                    const ModelConfig& config) {
  return forward(window.features, window.market.values, params, config);
}

}  // namespace master::model
