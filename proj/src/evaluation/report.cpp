#include "master/evaluation/report.hpp"

#include <fstream>

#include "master/evaluation/correlation.hpp"
#include "master/market_data/csv_io.hpp"
#include "master/model/master_model.hpp"

namespace master::eval {

std::vector<DailyPrediction> predict_windows(std::span<const data::SampleWindow> windows,
                                             const model::ModelParams& params,
                                             const model::ModelConfig& config,
                                             const std::vector<std::string>& stocks) {
  nn::NoGradGuard no_grad;
  std::vector<DailyPrediction> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    const auto result = model::forward(w, params, config);
    const auto scores = result.prediction.values();
    out.push_back({w.prediction_date, stocks, {scores.begin(), scores.end()}, w.raw_returns,
                   w.labels});
  }
  return out;
}

void attach_index_benchmark(std::span<DailyPrediction> daily, const data::Panel& panel,
                            const data::IndexSeries& series, const std::string& index_id,
                            std::size_t horizon) {
  std::size_t column = series.num_indices();
  for (std::size_t i = 0; i < series.num_indices(); ++i)
    if (series.indices[i] == index_id) column = i;
  if (column == series.num_indices()) {
    throw MetricError("benchmark index '" + index_id + "' is not in the index series");
  }
  for (auto& day : daily) {
    const std::size_t p = panel.date_index(day.date);
    if (p + horizon >= panel.num_dates()) {
      throw MetricError("benchmark: label horizon of " + day.date + " runs past the calendar");
    }
    const auto base = series.find_date(panel.dates[p + 1]);
    const auto end = series.find_date(panel.dates[p + horizon]);
    if (base == std::string::npos || end == std::string::npos) {
      throw MetricError("benchmark: index series lacks the horizon dates of " + day.date);
    }
    const double start = series.price(base, column);
    day.benchmark_return = (series.price(end, column) - start) / start;
  }
}

MetricReport evaluate(std::span<const DailyPrediction> daily, const BacktestConfig& backtest) {
  MetricReport report;
  for (const auto& day : daily) report.dates.push_back(day.date);
  report.ranking = ranking_metrics(daily);
  report.backtest = backtest_topk(daily, backtest);
  return report;
}

void write_metric_report(const MetricReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.csv");
    if (!out) throw data::DataError("cannot write " + (dir / "metrics.csv").string());
    const std::pair<const char*, double> rows[] = {
        {"IC", report.ranking.ic},
        {"ICIR", report.ranking.icir},
        {"RankIC", report.ranking.rank_ic},
        {"RankICIR", report.ranking.rank_icir},
        {"AR", report.backtest.annualized_return},
        {"IR", report.backtest.information_ratio}};
    out << "metric,value\n";
    for (const auto& [name, value] : rows) out << name << ',' << data::format_decimal(value) << '\n';
  }
  std::ofstream out(dir / "daily.csv");
  if (!out) throw data::DataError("cannot write " + (dir / "daily.csv").string());
  out << "date,ic,rank_ic,excess_return\n";
  for (std::size_t i = 0; i < report.dates.size(); ++i) {
    out << report.dates[i] << ',' << data::format_decimal(report.ranking.daily_ic[i]) << ','
        << data::format_decimal(report.ranking.daily_rank_ic[i]) << ','
        << data::format_decimal(report.backtest.daily_excess[i]) << '\n';
  }
}

std::vector<std::pair<std::string, double>> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data::DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "metric,value") throw data::DataError(path.string() + ": bad header");
  std::vector<std::pair<std::string, double>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = data::split_csv_line(line);
    if (cells.size() != 2) throw data::DataError(path.string() + ": malformed row '" + line + "'");
    out.emplace_back(cells[0], data::parse_decimal(cells[1]));
  }
  return out;
}

}  // namespace master::eval
