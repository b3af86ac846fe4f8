#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace master::eval {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constant input has no defined correlation; value is then 0 and
// degenerate is set.
struct Correlation {
  double value = 0.0;
  bool degenerate = false;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);
// Pearson of average-tie ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);
// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace master::eval
