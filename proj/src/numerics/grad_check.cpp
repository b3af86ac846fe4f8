#include "master/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace master::nn {

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& block : blocks) worst = std::max(worst, block.max_relative_error);
  return worst;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<Tensor()>& fn, std::vector<NamedTensor> params,
                           double eps_fd, double tolerance) {
  if (!(eps_fd > 0.0)) throw std::invalid_argument("grad_check: eps_fd must be positive");
  for (auto& p : params) p.tensor.zero_grad();
  backward(fn());

  GradCheckReport report;
  report.tolerance = tolerance;
  NoGradGuard no_grad;
  for (auto& p : params) {
    GradCheckBlock block;
    block.name = p.name;
    std::vector<double> analytic(p.tensor.size(), 0.0);
    if (p.tensor.has_grad()) {
      auto g = p.tensor.grad();
      std::copy(g.begin(), g.end(), analytic.begin());
    }
    auto values = p.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps_fd;
      const double up = fn().item();
      values[i] = saved - eps_fd;
      const double down = fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps_fd);
      const double err = relative_error(analytic[i], numeric);
      if (i == 0 || err > block.max_relative_error) {
        block.max_relative_error = err;
        block.worst_index = i;
        block.analytic = analytic[i];
        block.numeric = numeric;
      }
    }
    report.blocks.push_back(block);
  }
  for (auto& p : params) p.tensor.zero_grad();
  return report;
}

}  // namespace master::nn
