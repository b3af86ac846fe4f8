#include "master/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "master/numerics/flops.hpp"

namespace master::nn {

namespace {

using detail::Node;

bool wants_grad(const std::shared_ptr<Node>& node) { return node->requires_grad; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
}

void require_suffix(const Tensor& a, const Tensor& b, const char* op) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  bool ok = sb.size() <= sa.size() &&
            std::equal(sb.begin(), sb.end(), sa.end() - static_cast<std::ptrdiff_t>(sb.size()));
  if (!ok) {
    throw ShapeError(std::string(op) + ": " + to_string(sb) +
                     " is not a trailing suffix of " + to_string(sa));
  }
}

// c[n,m] += a[n,k] b[k,m]
void gemm_nn(const double* a, const double* b, double* c, std::size_t n,
             std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * m;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[n,m] += a[n,k] b[m,k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t n,
             std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * m + j] += acc;
    }
  }
}

// c[k,m] += a[n,k]^T b[n,m]
void gemm_tn(const double* a, const double* b, double* c, std::size_t n,
             std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

// c[n,m] = sum_p a[n,p] b[p,m], each sum taken over sorted terms.
void gemm_nn_invariant(const double* a, const double* b, double* c, std::size_t n,
                       std::size_t k, std::size_t m) {
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t p = 0; p < k; ++p) terms[p] = a[i * k + p] * b[p * m + j];
      c[i * m + j] = sorted_sum(terms);
    }
  }
}

std::size_t resolve_axis(int axis, std::size_t rank) {
  const int r = static_cast<int>(rank);
  const int resolved = axis < 0 ? r + axis : axis;
  if (resolved < 0 || resolved >= r) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  return static_cast<std::size_t>(resolved);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_suffix(a, b, "add");
  const std::size_t inner = b.size();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % inner];
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {&a, &b}, "add",
                     [an, bn, inner](Node& self) {
                       if (wants_grad(an)) {
                         auto& g = an->grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
                       }
                       if (wants_grad(bn)) {
                         auto& g = bn->grad_buffer();
                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                           g[i % inner] += self.grad[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {&a, &b}, "sub", [an, bn](Node& self) {
    if (wants_grad(an)) {
      auto& g = an->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(bn)) {
      auto& g = bn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_suffix(a, b, "mul");
  const std::size_t inner = b.size();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i % inner];
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {&a, &b}, "mul",
                     [an, bn, inner](Node& self) {
                       if (wants_grad(an)) {
                         auto& g = an->grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i)
                           g[i] += self.grad[i] * bn->value[i % inner];
                       }
                       if (wants_grad(bn)) {
                         auto& g = bn->grad_buffer();
                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                           g[i % inner] += self.grad[i] * an->value[i];
                       }
                     });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  return make_result(a.shape(), std::move(out), {&a}, "scale", [an, factor](Node& self) {
    auto& g = an->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor square(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= v;
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  return make_result(a.shape(), std::move(out), {&a}, "square", [an](Node& self) {
    auto& g = an->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * an->value[i] * self.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  count_flops(cost::elementwise(out.size()));
  auto an = a.node();
  return make_result(a.shape(), std::move(out), {&a}, "relu", [an](Node& self) {
    auto& g = an->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (an->value[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  count_flops(cost::elementwise(a.size()));
  auto an = a.node();
  return make_result(Shape{}, {acc}, {&a}, "sum", [an](Node& self) {
    auto& g = an->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (weight.rank() != 2 || x.rank() == 0 || x.shape().back() != weight.dim(0)) {
    throw ShapeError("affine: input " + to_string(x.shape()) + " incompatible with weight " +
                     to_string(weight.shape()));
  }
  const std::size_t in = weight.dim(0);
  const std::size_t out_dim = weight.dim(1);
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{out_dim}) {
    throw ShapeError("affine: bias " + to_string(bias.shape()) + " does not match weight " +
                     to_string(weight.shape()));
  }
  const std::size_t rows = x.size() / in;
  std::vector<double> out(rows * out_dim, 0.0);
  if (has_bias) {
    const auto bv = bias.values();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(bv.begin(), bv.end(), out.begin() + static_cast<std::ptrdiff_t>(r * out_dim));
    count_flops(cost::bias(rows, out_dim));
  }
  gemm_nn(x.values().data(), weight.values().data(), out.data(), rows, in, out_dim);
  count_flops(cost::matmul(1, rows, in, out_dim));

  Shape shape = x.shape();
  shape.back() = out_dim;
  auto xn = x.node();
  auto wn = weight.node();
  std::shared_ptr<Node> bn = has_bias ? bias.node() : nullptr;
  return make_result(std::move(shape), std::move(out), {&x, &weight, has_bias ? &bias : nullptr},
                     has_bias ? "affine" : "matmul",
                     [xn, wn, bn, rows, in, out_dim](Node& self) {
                       const double* dy = self.grad.data();
                       if (wants_grad(xn)) {
                         gemm_nt(dy, wn->value.data(), xn->grad_buffer().data(), rows, out_dim, in);
                       }
                       if (wants_grad(wn)) {
                         gemm_tn(xn->value.data(), dy, wn->grad_buffer().data(), rows, in, out_dim);
                       }
                       if (bn && wants_grad(bn)) {
                         auto& g = bn->grad_buffer();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t j = 0; j < out_dim; ++j) g[j] += dy[r * out_dim + j];
                       }
                     });
}

Tensor matmul(const Tensor& x, const Tensor& weight) { return affine(x, weight, Tensor()); }

Tensor batched_matmul(const Tensor& a, const Tensor& b, bool transpose_b, bool order_invariant) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() < 2 || sa.size() != sb.size() ||
      !std::equal(sa.begin(), sa.end() - 2, sb.begin())) {
    throw ShapeError("batched_matmul: incompatible shapes " + to_string(sa) + " and " +
                     to_string(sb));
  }
  const std::size_t n = sa[sa.size() - 2];
  const std::size_t k = sa.back();
  const std::size_t kb = transpose_b ? sb.back() : sb[sb.size() - 2];
  const std::size_t m = transpose_b ? sb[sb.size() - 2] : sb.back();
  if (k != kb) {
    throw ShapeError("batched_matmul: inner extents differ " + to_string(sa) + " and " +
                     to_string(sb) + (transpose_b ? " (b transposed)" : ""));
  }
  if (order_invariant && transpose_b) {
    throw ShapeError("batched_matmul: order-invariant accumulation needs untransposed b");
  }
  const std::size_t batch = a.size() / (n * k);
  std::vector<double> out(batch * n * m, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t s = 0; s < batch; ++s) {
    const double* as = av + s * n * k;
    const double* bs = bv + s * k * m;
    double* cs = out.data() + s * n * m;
    if (transpose_b) {
      gemm_nt(as, bs, cs, n, k, m);
    } else if (order_invariant) {
      gemm_nn_invariant(as, bs, cs, n, k, m);
    } else {
      gemm_nn(as, bs, cs, n, k, m);
    }
  }
  count_flops(cost::matmul(batch, n, k, m));

  Shape shape(sa.begin(), sa.end() - 2);
  shape.push_back(n);
  shape.push_back(m);
  auto an = a.node();
  auto bn = b.node();
  return make_result(std::move(shape), std::move(out), {&a, &b}, "batched_matmul",
                     [an, bn, batch, n, k, m, transpose_b](Node& self) {
                       for (std::size_t s = 0; s < batch; ++s) {
                         const double* dc = self.grad.data() + s * n * m;
                         const double* as = an->value.data() + s * n * k;
                         const double* bs = bn->value.data() + s * k * m;
                         if (wants_grad(an)) {
                           double* da = an->grad_buffer().data() + s * n * k;
                           if (transpose_b) {
                             gemm_nn(dc, bs, da, n, m, k);
                           } else {
                             gemm_nt(dc, bs, da, n, m, k);
                           }
                         }
                         if (wants_grad(bn)) {
                           double* db = bn->grad_buffer().data() + s * k * m;
                           if (transpose_b) {
                             gemm_tn(dc, as, db, n, m, k);
                           } else {
                             gemm_tn(as, dc, db, n, k, m);
                           }
                         }
                       }
                     });
}

Tensor softmax_temp(const Tensor& z, double beta, int axis, bool order_invariant) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("softmax_temp: temperature must be positive and finite, got " +
                                std::to_string(beta));
  }
  const std::size_t ax = resolve_axis(axis, z.rank());
  const auto& shape = z.shape();
  const std::size_t n = shape[ax];
  std::size_t outer = 1;
  for (std::size_t i = 0; i < ax; ++i) outer *= shape[i];
  std::size_t inner = 1;
  for (std::size_t i = ax + 1; i < shape.size(); ++i) inner *= shape[i];

  const auto zv = z.values();
  std::vector<double> out(z.size());
  std::vector<double> terms(n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, zv[base + k * inner] / beta);
      for (std::size_t k = 0; k < n; ++k) terms[k] = std::exp(zv[base + k * inner] / beta - mx);
      double denom = 0.0;
      if (order_invariant) {
        std::vector<double> sorted = terms;
        denom = sorted_sum(sorted);
      } else {
        for (double t : terms) denom += t;
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k * inner] = terms[k] / denom;
    }
  }
  count_flops(cost::softmax(outer * inner, n));

  auto zn = z.node();
  return make_result(shape, std::move(out), {&z}, "softmax_temp",
                     [zn, beta, outer, n, inner](Node& self) {
                       auto& g = zn->grad_buffer();
                       const auto& y = self.value;
                       const auto& dy = self.grad;
                       for (std::size_t o = 0; o < outer; ++o) {
                         for (std::size_t in = 0; in < inner; ++in) {
                           const std::size_t base = o * n * inner + in;
                           double dot = 0.0;
                           for (std::size_t k = 0; k < n; ++k)
                             dot += dy[base + k * inner] * y[base + k * inner];
                           for (std::size_t k = 0; k < n; ++k) {
                             const std::size_t idx = base + k * inner;
                             g[idx] += y[idx] * (dy[idx] - dot) / beta;
                           }
                         }
                       }
                     });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (x.rank() == 0) throw ShapeError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw ShapeError("layer_norm: gain/bias " + to_string(gain.shape()) + "/" +
                     to_string(bias.shape()) + " do not match input " + to_string(x.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += row[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (row[i] - mean) * inv;
      xhat[r * d + i] = h;
      out[r * d + i] = h * gv[i] + bv[i];
    }
  }
  count_flops(cost::layer_norm(rows, d));

  auto xn = x.node();
  auto gn = gain.node();
  auto bn = bias.node();
  return make_result(x.shape(), std::move(out), {&x, &gain, &bias}, "layer_norm",
                     [xn, gn, bn, rows, d, xhat = std::move(xhat),
                      inv_std = std::move(inv_std)](Node& self) {
                       const auto& dy = self.grad;
                       if (wants_grad(gn)) {
                         auto& g = gn->grad_buffer();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t i = 0; i < d; ++i) g[i] += dy[r * d + i] * xhat[r * d + i];
                       }
                       if (wants_grad(bn)) {
                         auto& g = bn->grad_buffer();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t i = 0; i < d; ++i) g[i] += dy[r * d + i];
                       }
                       if (wants_grad(xn)) {
                         auto& g = xn->grad_buffer();
                         const auto& gain_v = gn->value;
                         const double inv_d = 1.0 / static_cast<double>(d);
                         for (std::size_t r = 0; r < rows; ++r) {
                           double mean_dh = 0.0;
                           double mean_dh_h = 0.0;
                           for (std::size_t i = 0; i < d; ++i) {
                             const double dh = dy[r * d + i] * gain_v[i];
                             mean_dh += dh;
                             mean_dh_h += dh * xhat[r * d + i];
                           }
                           mean_dh *= inv_d;
                           mean_dh_h *= inv_d;
                           for (std::size_t i = 0; i < d; ++i) {
                             const double dh = dy[r * d + i] * gain_v[i];
                             g[r * d + i] +=
                                 inv_std[r] * (dh - mean_dh - xhat[r * d + i] * mean_dh_h);
                           }
                         }
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  auto xn = x.node();
  return make_result(std::move(shape), std::move(out), {&x}, "reshape", [xn](Node& self) {
    auto& g = xn->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
  const auto& shape = x.shape();
  const std::size_t rank = shape.size();
  std::vector<bool> seen(rank, false);
  if (order.size() != rank) throw ShapeError("permute: order length differs from rank");
  for (auto axis : order) {
    if (axis >= rank || seen[axis]) throw ShapeError("permute: invalid axis order");
    seen[axis] = true;
  }
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * shape[i];
  Shape out_shape(rank);
  std::vector<std::size_t> strides(rank);  // input stride for each output axis
  for (std::size_t i = 0; i < rank; ++i) {
    out_shape[i] = shape[order[i]];
    strides[i] = in_strides[order[i]];
  }
  // Precomputed source index for each output position.
  const std::size_t total = x.size();
  std::vector<std::size_t> source(total);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    source[flat] = offset;
    for (std::size_t axis = rank; axis-- > 0;) {
      ++counter[axis];
      offset += strides[axis];
      if (counter[axis] < out_shape[axis]) break;
      offset -= strides[axis] * out_shape[axis];
      counter[axis] = 0;
    }
  }
  const auto xv = x.values();
  std::vector<double> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = xv[source[i]];
  auto xn = x.node();
  return make_result(std::move(out_shape), std::move(out), {&x}, "permute",
                     [xn, source = std::move(source)](Node& self) {
                       auto& g = xn->grad_buffer();
                       for (std::size_t i = 0; i < source.size(); ++i) g[source[i]] += self.grad[i];
                     });
}

Tensor select(const Tensor& x, std::size_t axis, std::size_t index) {
  const auto& shape = x.shape();
  if (axis >= shape.size() || index >= shape[axis]) {
    throw ShapeError("select: index " + std::to_string(index) + " on axis " +
                     std::to_string(axis) + " out of range for " + to_string(shape));
  }
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  const auto xv = x.values();
  std::vector<double> out(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] = xv[(o * n + index) * inner + i];
  Shape out_shape;
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (i != axis) out_shape.push_back(shape[i]);
  auto xn = x.node();
  return make_result(std::move(out_shape), std::move(out), {&x}, "select",
                     [xn, outer, inner, n, index](Node& self) {
                       auto& g = xn->grad_buffer();
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t i = 0; i < inner; ++i)
                           g[(o * n + index) * inner + i] += self.grad[o * inner + i];
                     });
}

Tensor sinusoidal_pe(std::size_t steps, std::size_t d) {
  if (d == 0 || d % 2 != 0) {
    throw std::invalid_argument("sinusoidal_pe: embedding width must be even, got " +
                                std::to_string(d));
  }
  std::vector<double> out(steps * d);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < d / 2; ++k) {
      const double freq =
          std::pow(10000.0, static_cast<double>(2 * k) / static_cast<double>(d));
      const double angle = static_cast<double>(t) / freq;
      out[t * d + 2 * k] = std::sin(angle);
      out[t * d + 2 * k + 1] = std::cos(angle);
    }
  }
  return Tensor(Shape{steps, d}, std::move(out));
}

}  // namespace master::nn
