#pragma once

#include <cstddef>
#include <vector>

#include "master/numerics/tensor.hpp"

namespace master::nn {

inline constexpr double kLayerNormEps = 1e-5;

// Elementwise a + b. `b` may have the shape of a trailing suffix of `a`, in
// which case it is broadcast over the leading axes (bias / positional add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Hadamard product with the same suffix broadcast rule as add().
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sum(const Tensor& a);

// y = x W + b over the last axis of x. `bias` may be undefined (Tensor with
// no node) for a bias-free projection.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor matmul(const Tensor& x, const Tensor& weight);

// Batched product over identical leading axes: [..., n, k] x [..., k, m],
// or [..., n, k] x [..., m, k]^T with transpose_b. With order_invariant the
// contraction is accumulated in sorted order, so permuting the contraction
// index leaves the result bit-identical.
Tensor batched_matmul(const Tensor& a, const Tensor& b, bool transpose_b = false,
                      bool order_invariant = false);

// exp(z/beta - max) / sum(...) along `axis` (negative counts from the end).
Tensor softmax_temp(const Tensor& z, double beta, int axis = -1,
                    bool order_invariant = false);

// Normalizes the last axis with population variance, then gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
// Drops `axis` by taking slice `index` along it.
Tensor select(const Tensor& x, std::size_t axis, std::size_t index);

// Fixed encoding: row t holds sin/cos pairs of t / 10000^(2k/d), t from 0.
Tensor sinusoidal_pe(std::size_t steps, std::size_t d);

}  // namespace master::nn
