#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "master/evaluation/metrics.hpp"

namespace master::eval {

enum class Benchmark { universe, index };

struct BacktestConfig {
  std::size_t top_k = 30;
  std::size_t horizon = 5;  // d; returns are attributed per day as raw / d
  double trading_days_per_year = 252.0;
  Benchmark benchmark = Benchmark::universe;
};

struct BacktestResult {
  double annualized_return = 0.0;  // AR
  double information_ratio = 0.0;  // IR
  bool ir_degenerate = false;
  std::vector<double> daily_excess;
  std::vector<std::string> warnings;
};

// Indices of the k highest scores, ties resolved by ascending stock id.
std::vector<std::size_t> top_k(std::span<const double> scores,
                               std::span<const std::string> stocks, std::size_t k);

BacktestResult backtest_topk(std::span<const DailyPrediction> daily, const BacktestConfig& config);

}  // namespace master::eval
