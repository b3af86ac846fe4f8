#include "master/market_data/windows.hpp"

#include <algorithm>
#include <string>

#include "master/market_data/labels.hpp"
#include "master/market_data/market_status.hpp"

namespace master::data {

std::string_view to_string(SplitRole role) {
  switch (role) {
    case SplitRole::train: return "train";
    case SplitRole::valid: return "valid";
    case SplitRole::test: return "test";
  }
  return "unknown";
}

std::vector<std::size_t> align_calendars(const Panel& panel, const IndexSeries& series) {
  std::vector<std::size_t> positions(panel.num_dates());
  for (std::size_t d = 0; d < panel.num_dates(); ++d) {
    const auto pos = series.find_date(panel.dates[d]);
    if (pos == std::string::npos) {
      throw DataError("calendar misalignment: panel date " + panel.dates[d] +
                      " is missing from the index series");
    }
    positions[d] = pos;
  }
  return positions;
}

std::vector<std::size_t> eligible_dates(std::size_t num_dates,
                                        const std::vector<std::size_t>& index_positions,
                                        const WindowConfig& config, DateRange range,
                                        bool allow_label_overrun) {
  if (config.lookback == 0) throw DataError("windows: lookback must be at least 1");
  if (config.horizon == 0) throw DataError("windows: horizon must be at least 1");
  if (config.intervals.empty()) throw DataError("windows: interval set is empty");
  const std::size_t longest = *std::max_element(config.intervals.begin(), config.intervals.end());
  const std::size_t label_limit = allow_label_overrun ? num_dates - 1 : range.last;
  std::vector<std::size_t> out;
  for (std::size_t p = range.first; p <= range.last && p < num_dates; ++p) {
    if (p + 1 < config.lookback) continue;
    if (index_positions[p] + 1 < longest) continue;
    if (p + config.horizon > label_limit) continue;
    out.push_back(p);
  }
  return out;
}

SampleWindow build_window(const Panel& panel, const IndexSeries& series,
                          std::size_t index_position, const WindowConfig& config,
                          std::size_t prediction_date) {
  const std::size_t tau = config.lookback;
  if (prediction_date + 1 < tau) {
    throw HistoryTooShort("window at " + panel.dates[prediction_date] + " needs " +
                          std::to_string(tau) + " days of lookback, only " +
                          std::to_string(prediction_date + 1) + " available");
  }
  const std::size_t m = panel.num_stocks();
  const std::size_t f = panel.num_features;
  std::vector<double> values(m * tau * f);
  const std::size_t first_day = prediction_date + 1 - tau;
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t t = 0; t < tau; ++t)
      for (std::size_t k = 0; k < f; ++k)
        values[(u * tau + t) * f + k] = panel.feature(first_day + t, u, k);

  SampleWindow w;
  w.prediction_date = panel.dates[prediction_date];
  w.date_index = prediction_date;
  w.features = nn::Tensor({m, tau, f}, std::move(values));
  w.market = build_market_status(series, index_position, config.intervals);
  w.raw_returns = compute_return_ratio(panel, prediction_date, config.horizon);
  w.labels = normalize_labels(w.raw_returns);
  return w;
}

std::vector<SampleWindow> build_windows(const Panel& panel, const IndexSeries& series,
                                        const WindowConfig& config, DateRange range,
                                        SplitRole role) {
  const auto positions = align_calendars(panel, series);
  const bool overrun = !config.strict_labels && role != SplitRole::test;
  const auto dates = eligible_dates(panel.num_dates(), positions, config, range, overrun);
  if (dates.empty()) {
    throw NoEligibleWindows(std::string(to_string(role)) + " split [" + panel.dates[range.first] +
                            ", " + panel.dates[std::min(range.last, panel.num_dates() - 1)] +
                            "] has no eligible prediction date for lookback " +
                            std::to_string(config.lookback) + " and horizon " +
                            std::to_string(config.horizon));
  }
  std::vector<SampleWindow> out;
  out.reserve(dates.size());
  for (std::size_t p : dates) out.push_back(build_window(panel, series, positions[p], config, p));
  return out;
}

WindowSet build_windows(const Panel& panel, const IndexSeries& series,
                        const WindowConfig& config, const SplitSpec& split) {
  split.validate(panel.num_dates());
  WindowSet set;
  set.train = build_windows(panel, series, config, split.train, SplitRole::train);
  set.valid = build_windows(panel, series, config, split.valid, SplitRole::valid);
  set.test = build_windows(panel, series, config, split.test, SplitRole::test);
  return set;
}

}  // namespace master::data
