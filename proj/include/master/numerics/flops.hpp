#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace master::nn {

// Analytic floating-point operation counts for each primitive. The same
// functions are used by the live counter inside the ops and by callers that
// want to cost a computation without running it.
namespace cost {

// [batch, n, k] x [batch, k, m]: one multiply and one add per term.
double matmul(std::size_t batch, std::size_t n, std::size_t k, std::size_t m);
// Bias add over rows x cols.
double bias(std::size_t rows, std::size_t cols);
// Max, subtract, exp, sum and divide per element, plus the temperature scale.
double softmax(std::size_t rows, std::size_t n);
double layer_norm(std::size_t rows, std::size_t d);
double elementwise(std::size_t n);

}  // namespace cost

// Accumulates flops reported by primitives while it is installed on the
// current thread. Counts are keyed by the active FlopScope path
// ("inter_stock/attention" etc.).
class FlopCounter {
 public:
  FlopCounter();
  ~FlopCounter();
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  double total() const;
  // Sum over every path equal to `prefix` or nested below it.
  double under(std::string_view prefix) const;
  const std::map<std::string, double>& by_scope() const { return counts_; }

  void add(double flops);

 private:
  friend class FlopScope;
  std::map<std::string, double> counts_;
  std::vector<std::string> scopes_;
  FlopCounter* previous_;
};

class FlopScope {
 public:
  explicit FlopScope(std::string_view label);
  ~FlopScope();
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  bool active_;
};

// Called by primitives; no-op when no counter is installed.
void count_flops(double flops);

}  // namespace master::nn
