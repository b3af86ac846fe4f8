#include "master/evaluation/metrics.hpp"

#include <cmath>

#include "master/evaluation/correlation.hpp"

namespace master::eval {

SeriesRatio series_ratio(std::span<const double> series) {
  if (series.empty()) throw MetricError("series_ratio: empty series");
  const auto n = static_cast<double>(series.size());
  SeriesRatio out;
  for (double v : series) out.mean += v;
  out.mean /= n;
  double var = 0.0;
  for (double v : series) var += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(var / n);
  if (out.stddev == 0.0) {
    out.degenerate = true;
    out.ratio = out.mean == 0.0 ? 0.0
                                : std::copysign(std::numeric_limits<double>::infinity(), out.mean);
  } else {
    out.ratio = out.mean / out.stddev;
  }
  return out;
}

RankingMetrics ranking_metrics(std::span<const DailyPrediction> daily) {
  if (daily.empty()) throw MetricError("ranking_metrics: no dates to evaluate");
  RankingMetrics out;
  for (const auto& day : daily) {
    const auto ic = pearson(day.scores, day.labels);
    const auto ric = spearman(day.scores, day.labels);
    if (ic.degenerate || ric.degenerate) ++out.degenerate_days;
    out.daily_ic.push_back(ic.value);
    out.daily_rank_ic.push_back(ric.value);
  }
  const auto ic = series_ratio(out.daily_ic);
  const auto ric = series_ratio(out.daily_rank_ic);
  out.ic = ic.mean;
  out.icir = ic.ratio;
  out.icir_degenerate = ic.degenerate;
  out.rank_ic = ric.mean;
  out.rank_icir = ric.ratio;
  out.rank_icir_degenerate = ric.degenerate;
  return out;
}

double mean_ic(std::span<const DailyPrediction> daily) {
  if (daily.empty()) throw MetricError("mean_ic: no dates to evaluate");
  double sum = 0.0;
  for (const auto& day : daily) sum += pearson(day.scores, day.labels).value;
  return sum / static_cast<double>(daily.size());
}

}  // namespace master::eval
