#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "master/evaluation/backtest.hpp"
#include "master/evaluation/metrics.hpp"
#include "master/market_data/panel.hpp"
#include "master/model/config.hpp"
#include "master/model/params.hpp"

namespace master::eval {

struct MetricReport {
  std::vector<std::string> dates;
  RankingMetrics ranking;
  BacktestResult backtest;
};

// One inference pass per window, without graph construction.
std::vector<DailyPrediction> predict_windows(std::span<const data::SampleWindow> windows,
                                             const model::ModelParams& params,
                                             const model::ModelConfig& config,
                                             const std::vector<std::string>& stocks);

// Fills benchmark_return with the named index's return over the label
// horizon of each prediction date.
void attach_index_benchmark(std::span<DailyPrediction> daily, const data::Panel& panel,
                            const data::IndexSeries& series, const std::string& index_id,
                            std::size_t horizon);

MetricReport evaluate(std::span<const DailyPrediction> daily, const BacktestConfig& backtest);

// metrics.csv (metric,value: IC, ICIR, RankIC, RankICIR, AR, IR) and
// daily.csv (date,ic,rank_ic,excess_return).
void write_metric_report(const MetricReport& report, const std::filesystem::path& dir);
std::vector<std::pair<std::string, double>> read_metrics_csv(const std::filesystem::path& path);

}  // namespace master::eval
