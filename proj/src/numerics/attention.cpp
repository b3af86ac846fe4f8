#include "master/numerics/attention.hpp"

#include <cmath>
#include <string>

#include "master/numerics/flops.hpp"
#include "master/numerics/ops.hpp"

namespace master::nn {

namespace {

// [B..., n, D] -> [B, heads, n, d_h]
Tensor split_heads(const Tensor& x, std::size_t batch, std::size_t n, std::size_t heads,
                   std::size_t head_dim) {
  return permute(reshape(x, {batch, n, heads, head_dim}), {0, 2, 1, 3});
}

}  // namespace

AttentionResult multi_head_attention(const Tensor& q_in, const Tensor& k_in,
                                     const Tensor& v_in, const AttentionWeights& weights,
                                     std::size_t heads, bool order_invariant) {
  if (q_in.rank() < 2 || q_in.shape() != k_in.shape() || q_in.shape() != v_in.shape()) {
    throw ShapeError("multi_head_attention: query/key/value shapes " + to_string(q_in.shape()) +
                     ", " + to_string(k_in.shape()) + ", " + to_string(v_in.shape()) +
                     " must agree and have rank >= 2");
  }
  const auto& shape = q_in.shape();
  const std::size_t d = shape.back();
  const std::size_t n = shape[shape.size() - 2];
  if (heads == 0 || d % heads != 0) {
    throw std::invalid_argument("multi_head_attention: width " + std::to_string(d) +
                                " is not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t head_dim = d / heads;
  const std::size_t batch = q_in.size() / (n * d);

  Tensor q;
  Tensor k;
  Tensor v;
  {
    FlopScope scope("projection");
    q = split_heads(matmul(q_in, weights.query), batch, n, heads, head_dim);
    k = split_heads(matmul(k_in, weights.key), batch, n, heads, head_dim);
    v = split_heads(matmul(v_in, weights.value), batch, n, heads, head_dim);
  }
  Tensor attn;
  Tensor mixed;
  {
    FlopScope scope("pairwise");
    // softmax(q k^T / sqrt(d_h)) == softmax_temp(q k^T, sqrt(d_h))
    Tensor scores = batched_matmul(q, k, /*transpose_b=*/true);
    attn = softmax_temp(scores, std::sqrt(static_cast<double>(head_dim)), -1, order_invariant);
    mixed = batched_matmul(attn, v, false, order_invariant);
  }
  Tensor merged = reshape(permute(mixed, {0, 2, 1, 3}), shape);

  Shape weight_shape(shape.begin(), shape.end() - 2);
  weight_shape.push_back(heads);
  weight_shape.push_back(n);
  weight_shape.push_back(n);
  Tensor captured(weight_shape, std::vector<double>(attn.values().begin(), attn.values().end()));
  return {std::move(merged), std::move(captured)};
}

Tensor ffn_relu_residual(const Tensor& x, const FeedForwardWeights& weights) {
  FlopScope scope("ffn");
  Tensor hidden = relu(affine(x, weights.w1, weights.b1));
  return add(x, affine(hidden, weights.w2, weights.b2));
}

}  // namespace master::nn
