#include "master/model/params.hpp"

#include <cmath>
#include <string>

#include "master/numerics/random.hpp"

namespace master::model {

namespace {

nn::Tensor xavier(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(fan_in * fan_out);
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return nn::Tensor({fan_in, fan_out}, std::move(values), true);
}

nn::Tensor zeros_of(nn::Shape shape) { return nn::Tensor(std::move(shape), true); }

nn::AttentionWeights attention_zeros(std::size_t d) {
  return {zeros_of({d, d}), zeros_of({d, d}), zeros_of({d, d})};
}

nn::FeedForwardWeights ffn_zeros(std::size_t d, std::size_t hidden) {
  return {zeros_of({d, hidden}), zeros_of({hidden}), zeros_of({hidden, d}), zeros_of({d})};
}

std::vector<nn::Shape> expected_shapes(const ModelConfig& c) {
  const std::size_t f = c.num_features;
  const std::size_t d = c.hidden;
  const std::size_t h = c.ffn_width();
  return {{c.market_dim, f}, {f}, {f, d}, {d}, {d}, {d},
          {d, d}, {d, d}, {d, d}, {d, h}, {h}, {h, d}, {d},
          {d, d}, {d, d}, {d, d}, {d, h}, {h}, {h, d}, {d},
          {d, d}, {d, 1}, {1}};
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  const std::size_t f = config.num_features;
  const std::size_t d = config.hidden;
  const std::size_t h = config.ffn_width();
  ModelParams p;
  p.gate_weight = zeros_of({config.market_dim, f});
  p.gate_bias = zeros_of({f});
  p.encoder_weight = zeros_of({f, d});
  p.encoder_bias = zeros_of({d});
  p.norm_gain = nn::Tensor::full({d}, 1.0, true);
  p.norm_bias = zeros_of({d});
  p.intra = attention_zeros(d);
  p.intra_ffn = ffn_zeros(d, h);
  p.inter = attention_zeros(d);
  p.inter_ffn = ffn_zeros(d, h);
  p.temporal_weight = zeros_of({d, d});
  p.predictor_weight = zeros_of({d, 1});
  p.predictor_bias = zeros_of({1});
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = zeros(config);
  Rng rng(seed);
  const std::size_t f = config.num_features;
  const std::size_t d = config.hidden;
  const std::size_t h = config.ffn_width();
  p.gate_weight = xavier(rng, config.market_dim, f);
  p.encoder_weight = xavier(rng, f, d);
  for (auto* attn : {&p.intra, &p.inter}) {
    attn->query = xavier(rng, d, d);
    attn->key = xavier(rng, d, d);
    attn->value = xavier(rng, d, d);
  }
  for (auto* ffn : {&p.intra_ffn, &p.inter_ffn}) {
    ffn->w1 = xavier(rng, d, h);
    ffn->w2 = xavier(rng, h, d);
  }
  p.predictor_weight = xavier(rng, d, 1);
  return p;
}

std::vector<nn::NamedTensor> ModelParams::named() const {
  return {{"gate.weight", gate_weight},
          {"gate.bias", gate_bias},
          {"encoder.weight", encoder_weight},
          {"encoder.bias", encoder_bias},
          {"norm.gain", norm_gain},
          {"norm.bias", norm_bias},
          {"intra.query", intra.query},
          {"intra.key", intra.key},
          {"intra.value", intra.value},
          {"intra_ffn.w1", intra_ffn.w1},
          {"intra_ffn.b1", intra_ffn.b1},
          {"intra_ffn.w2", intra_ffn.w2},
          {"intra_ffn.b2", intra_ffn.b2},
          {"inter.query", inter.query},
          {"inter.key", inter.key},
          {"inter.value", inter.value},
          {"inter_ffn.w1", inter_ffn.w1},
          {"inter_ffn.b1", inter_ffn.b1},
          {"inter_ffn.w2", inter_ffn.w2},
          {"inter_ffn.b2", inter_ffn.b2},
          {"temporal.weight", temporal_weight},
          {"predictor.weight", predictor_weight},
          {"predictor.bias", predictor_bias}};
}

void ModelParams::zero_grad() {
  for (auto& p : named()) p.tensor.zero_grad();
}

ModelParams ModelParams::clone() const {
  auto copy = [](const nn::Tensor& t) {
    nn::Tensor out = t.detach();
    out.set_requires_grad(true);
    return out;
  };
  ModelParams p;
  p.gate_weight = copy(gate_weight);
  p.gate_bias = copy(gate_bias);
  p.encoder_weight = copy(encoder_weight);
  p.encoder_bias = copy(encoder_bias);
  p.norm_gain = copy(norm_gain);
  p.norm_bias = copy(norm_bias);
  p.intra = {copy(intra.query), copy(intra.key), copy(intra.value)};
  p.intra_ffn = {copy(intra_ffn.w1), copy(intra_ffn.b1), copy(intra_ffn.w2), copy(intra_ffn.b2)};
  p.inter = {copy(inter.query), copy(inter.key), copy(inter.value)};
  p.inter_ffn = {copy(inter_ffn.w1), copy(inter_ffn.b1), copy(inter_ffn.w2), copy(inter_ffn.b2)};
  p.temporal_weight = copy(temporal_weight);
  p.predictor_weight = copy(predictor_weight);
  p.predictor_bias = copy(predictor_bias);
  return p;
}

void ModelParams::check_shapes(const ModelConfig& config) const {
  const auto arrays = named();
  const auto shapes = expected_shapes(config);
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    if (!arrays[i].tensor.defined() || arrays[i].tensor.shape() != shapes[i]) {
      throw ConfigError("parameter " + arrays[i].name + " has shape " +
                        (arrays[i].tensor.defined() ? nn::to_string(arrays[i].tensor.shape())
                                                    : std::string("<undefined>")) +
                        ", config expects " + nn::to_string(shapes[i]));
    }
  }
}

}  // namespace master::model
