#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "master/numerics/tensor.hpp"

namespace master::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradCheckBlock {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;   // at worst_index
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double tolerance = 0.0;

  double max_relative_error() const;
  bool passed() const { return max_relative_error() < tolerance; }
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Compares reverse-mode gradients of `fn` against central differences
// (fn(p + eps) - fn(p - eps)) / 2 eps, coordinate by coordinate. `fn` must
// rebuild its graph from the current parameter values on every call and
// return a scalar. Parameter gradients are zeroed before and after.
GradCheckReport grad_check(const std::function<Tensor()>& fn, std::vector<NamedTensor> params,
                           double eps_fd = 1e-5, double tolerance = 1e-4);

}  // namespace master::nn
