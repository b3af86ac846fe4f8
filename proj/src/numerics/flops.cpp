#include "master/numerics/flops.hpp"

namespace master::nn {

namespace {
thread_local FlopCounter* t_counter = nullptr;
}

namespace cost {

double matmul(std::size_t batch, std::size_t n, std::size_t k, std::size_t m) {
  return 2.0 * static_cast<double>(batch) * static_cast<double>(n) *
         static_cast<double>(k) * static_cast<double>(m);
}

double bias(std::size_t rows, std::size_t cols) {
  return static_cast<double>(rows) * static_cast<double>(cols);
}

double softmax(std::size_t rows, std::size_t n) {
  return 6.0 * static_cast<double>(rows) * static_cast<double>(n);
}

double layer_norm(std::size_t rows, std::size_t d) {
  return 8.0 * static_cast<double>(rows) * static_cast<double>(d);
}

double elementwise(std::size_t n) { return static_cast<double>(n); }

}  // namespace cost

FlopCounter::FlopCounter() : previous_(t_counter) { t_counter = this; }
FlopCounter::~FlopCounter() { t_counter = previous_; }

double FlopCounter::total() const {
  double sum = 0.0;
  for (const auto& [_, flops] : counts_) sum += flops;
  return sum;
}

double FlopCounter::under(std::string_view prefix) const {
  double sum = 0.0;
  for (const auto& [path, flops] : counts_) {
    if (path == prefix ||
        (path.size() > prefix.size() && path.compare(0, prefix.size(), prefix) == 0 &&
         path[prefix.size()] == '/')) {
      sum += flops;
    }
  }
  return sum;
}

void FlopCounter::add(double flops) {
  std::string path;
  for (const auto& scope : scopes_) {
    if (!path.empty()) path += '/';
    path += scope;
  }
  counts_[path] += flops;
}

FlopScope::FlopScope(std::string_view label) : active_(t_counter != nullptr) {
  if (active_) t_counter->scopes_.emplace_back(label);
}

FlopScope::~FlopScope() {
  if (active_ && t_counter) t_counter->scopes_.pop_back();
}

void count_flops(double flops) {
  if (t_counter) t_counter->add(flops);
}

}  // namespace master::nn
