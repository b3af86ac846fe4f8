#include "master/evaluation/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "master/evaluation/correlation.hpp"

namespace master::eval {

namespace {

// Mean in index order. A constant set returns its value exactly, so equal
// cross-sections give an excess of exactly zero.
double mean_of(std::span<const double> values, std::vector<std::size_t> picks) {
  std::sort(picks.begin(), picks.end());
  const double first = values[picks.front()];
  bool constant = true;
  double sum = 0.0;
  for (auto i : picks) {
    constant = constant && values[i] == first;
    sum += values[i];
  }
  return constant ? first : sum / static_cast<double>(picks.size());
}

}  // namespace

std::vector<std::size_t> top_k(std::span<const double> scores,
                               std::span<const std::string> stocks, std::size_t k) {
  if (!stocks.empty() && scores.size() != stocks.size()) {
    throw MetricError("top_k: scores and ids differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return stocks.empty() ? a < b : stocks[a] < stocks[b];
  });
  order.resize(std::min(k, order.size()));
  return order;
}

BacktestResult backtest_topk(std::span<const DailyPrediction> daily,
                             const BacktestConfig& config) {
  if (config.top_k == 0) throw MetricError("backtest: k must be at least 1");
  if (config.horizon == 0) throw MetricError("backtest: horizon must be at least 1");
  if (!(config.trading_days_per_year > 0.0)) {
    throw MetricError("backtest: trading_days_per_year must be positive");
  }
  if (daily.empty()) throw MetricError("backtest: no dates to evaluate");
  BacktestResult out;
  bool warned = false;
  const auto d = static_cast<double>(config.horizon);
  for (const auto& day : daily) {
    const std::size_t m = day.raw_returns.size();
    if (m == 0 || day.scores.size() != m) {
      throw MetricError("backtest: date " + day.date + " has mismatched or empty vectors");
    }
    if (config.top_k > m && !warned) {
      out.warnings.push_back("k = " + std::to_string(config.top_k) + " exceeds the " +
                             std::to_string(m) + "-stock universe; holding every stock");
      warned = true;
    }
    const auto picks = top_k(day.scores, day.stocks, config.top_k);
    const double portfolio = mean_of(day.raw_returns, picks);
    double benchmark = 0.0;
    if (config.benchmark == Benchmark::index) {
      if (!std::isfinite(day.benchmark_return)) {
        throw MetricError("backtest: index benchmark requested but date " + day.date +
                          " has no index return");
      }
      benchmark = day.benchmark_return;
    } else {
      std::vector<std::size_t> all(m);
      std::iota(all.begin(), all.end(), 0);
      benchmark = mean_of(day.raw_returns, std::move(all));
    }
    out.daily_excess.push_back((portfolio - benchmark) / d);
  }
  const auto stats = series_ratio(out.daily_excess);
  out.annualized_return = stats.mean * config.trading_days_per_year;
  out.ir_degenerate = stats.degenerate;
  out.information_ratio =
      stats.degenerate ? stats.ratio : stats.ratio * std::sqrt(config.trading_days_per_year);
  return out;
}

}  // namespace master::eval
