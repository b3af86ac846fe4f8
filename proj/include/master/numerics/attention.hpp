#pragma once

#include <cstddef>

#include "master/numerics/tensor.hpp"

namespace master::nn {

// Full-width projections; head h uses columns [h*d_h, (h+1)*d_h).
struct AttentionWeights {
  Tensor query;  // [D, D]
  Tensor key;    // [D, D]
  Tensor value;  // [D, D]
};

struct AttentionResult {
  Tensor output;   // [..., n, D], heads concatenated
  Tensor weights;  // [..., heads, n, n], detached
};

// Scaled dot-product attention with `heads` heads over the last two axes of
// the inputs ([..., n, D]); leading axes are independent batches. Heads are
// merged by concatenation with no output projection. order_invariant makes
// the reductions over the key axis independent of key order.
AttentionResult multi_head_attention(const Tensor& q_in, const Tensor& k_in,
                                     const Tensor& v_in, const AttentionWeights& weights,
                                     std::size_t heads, bool order_invariant = false);

struct FeedForwardWeights {
  Tensor w1;  // [D, D_ff]
  Tensor b1;  // [D_ff]
  Tensor w2;  // [D_ff, D]
  Tensor b2;  // [D]
};

// x + affine2(relu(affine1(x)))
Tensor ffn_relu_residual(const Tensor& x, const FeedForwardWeights& weights);

}  // namespace master::nn
