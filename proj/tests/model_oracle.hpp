#pragma once
// Plain-loop reference for the full forward pass.

#include <cmath>

#include "master/model/master_model.hpp"
#include "oracles.hpp"

namespace oracle {

inline Vec values(const master::nn::Tensor& t) { return {t.values().begin(), t.values().end()}; }

struct Forward {
  Vec prediction, alpha, local, intra, inter, temporal, lambda, embedding;
};

inline Forward model_forward(const Vec& x, const Vec& market, const master::model::ModelParams& p,
                             const master::model::ModelConfig& c, std::size_t m) {
  const std::size_t tau = c.lookback, f = c.num_features, d = c.hidden, h = c.ffn_width();
  Forward out;
  // gating
  if (c.disable_gating) {
    out.alpha.assign(f, 1.0);
  } else {
    Vec logits = affine(market, values(p.gate_weight), values(p.gate_bias), 1, c.market_dim, f);
    out.alpha = softmax(logits, c.gate_temperature);
    for (auto& a : out.alpha) a *= static_cast<double>(f);
  }
  Vec xt(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] * out.alpha[i % f];

  // intra-stock
  Vec local(m * tau * d);
  out.intra.assign(m * c.intra_heads * tau * tau, 0.0);
  for (std::size_t u = 0; u < m; ++u) {
    Vec xu(xt.begin() + static_cast<long>(u * tau * f), xt.begin() + static_cast<long>((u + 1) * tau * f));
    Vec enc = affine(xu, values(p.encoder_weight), values(p.encoder_bias), tau, f, d);
    Vec y(tau * d);
    for (std::size_t t = 0; t < tau; ++t) {
      Vec row(d);
      for (std::size_t k = 0; k < d; ++k) {
        const double freq = std::pow(10000.0, -static_cast<double>(k - k % 2) / static_cast<double>(d));
        const double pe = k % 2 == 0 ? std::sin(static_cast<double>(t) * freq) : std::cos(static_cast<double>(t) * freq);
        row[k] = enc[t * d + k] + pe;
      }
      auto n = layer_norm_row(row, values(p.norm_gain), values(p.norm_bias));
      std::copy(n.begin(), n.end(), y.begin() + static_cast<long>(t * d));
    }
    auto att = attention(y, values(p.intra.query), values(p.intra.key), values(p.intra.value), tau, d, c.intra_heads);
    std::copy(att.weights.begin(), att.weights.end(), out.intra.begin() + static_cast<long>(u * att.weights.size()));
    for (std::size_t i = 0; i < y.size(); ++i) att.out[i] += y[i];
    auto hu = ffn(att.out, values(p.intra_ffn.w1), values(p.intra_ffn.b1), values(p.intra_ffn.w2),
                  values(p.intra_ffn.b2), tau, d, h);
    std::copy(hu.begin(), hu.end(), local.begin() + static_cast<long>(u * tau * d));
  }

  out.local = local;

  // inter-stock
  Vec z = local;
  out.inter.assign(tau * c.inter_heads * m * m, 0.0);
  for (std::size_t t = 0; t < tau; ++t) {
    if (c.disable_inter_stock) {
      for (std::size_t hh = 0; hh < c.inter_heads; ++hh)
        for (std::size_t u = 0; u < m; ++u) out.inter[((t * c.inter_heads + hh) * m + u) * m + u] = 1.0;
      continue;
    }
    Vec ht(m * d);
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t k = 0; k < d; ++k) ht[u * d + k] = local[(u * tau + t) * d + k];
    auto att = attention(ht, values(p.inter.query), values(p.inter.key), values(p.inter.value), m, d, c.inter_heads);
    std::copy(att.weights.begin(), att.weights.end(), out.inter.begin() + static_cast<long>(t * att.weights.size()));
    for (std::size_t i = 0; i < ht.size(); ++i) att.out[i] += ht[i];
    auto zt = ffn(att.out, values(p.inter_ffn.w1), values(p.inter_ffn.b1), values(p.inter_ffn.w2),
                  values(p.inter_ffn.b2), m, d, h);
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t k = 0; k < d; ++k) z[(u * tau + t) * d + k] = zt[u * d + k];
  }

  out.temporal = z;

  // temporal + predict
  const Vec wl = values(p.temporal_weight);
  const Vec wg = values(p.predictor_weight);
  const double bg = p.predictor_bias.values()[0];
  for (std::size_t u = 0; u < m; ++u) {
    const double* last = &z[(u * tau + tau - 1) * d];
    Vec scores(tau);
    for (std::size_t t = 0; t < tau; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += z[(u * tau + t) * d + i] * wl[i * d + j] * last[j];
      scores[t] = s;
    }
    auto lam = softmax(scores);
    out.lambda.insert(out.lambda.end(), lam.begin(), lam.end());
    Vec e(d, 0.0);
    for (std::size_t t = 0; t < tau; ++t)
      for (std::size_t k = 0; k < d; ++k) e[k] += lam[t] * z[(u * tau + t) * d + k];
    double r = bg;
    for (std::size_t k = 0; k < d; ++k) r += e[k] * wg[k];
    out.embedding.insert(out.embedding.end(), e.begin(), e.end());
    out.prediction.push_back(r);
  }
  return out;
}

}  // namespace oracle
