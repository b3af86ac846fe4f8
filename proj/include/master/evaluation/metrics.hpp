#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace master::eval {

struct DailyPrediction {
  std::string date;
  std::vector<std::string> stocks;
  std::vector<double> scores;       // model output
  std::vector<double> raw_returns;  // realized d-day return ratios
  std::vector<double> labels;       // normalized labels
  // Index return over the same horizon, used only with the index benchmark.
  double benchmark_return = std::numeric_limits<double>::quiet_NaN();
};

// mean / population std of a daily series. A zero std cannot be divided
// by; ratio is then +-inf by the sign of the mean (0 when the mean is 0)
// and degenerate is set.
struct SeriesRatio {
  double mean = 0.0;
  double stddev = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
};

SeriesRatio series_ratio(std::span<const double> series);

struct RankingMetrics {
  double ic = 0.0;
  double icir = 0.0;
  double rank_ic = 0.0;
  double rank_icir = 0.0;
  bool icir_degenerate = false;
  bool rank_icir_degenerate = false;
  std::vector<double> daily_ic;
  std::vector<double> daily_rank_ic;
  // Dates whose scores or labels were constant (correlation set to 0).
  std::size_t degenerate_days = 0;
};

RankingMetrics ranking_metrics(std::span<const DailyPrediction> daily);

// Mean daily IC only; what early stopping watches.
double mean_ic(std::span<const DailyPrediction> daily);

}  // namespace master::eval
