#include "master/market_data/market_status.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace master::data {

RollingStats rolling_stats(std::span<const double> series, std::size_t stride,
                           std::size_t offset, std::size_t end, std::size_t length) {
  if (length == 0 || end + 1 < length) {
    throw HistoryTooShort("rolling window of " + std::to_string(length) +
                          " days does not fit before position " + std::to_string(end));
  }
  const std::size_t begin = end + 1 - length;
  double mean = 0.0;
  for (std::size_t k = begin; k <= end; ++k) mean += series[k * stride + offset];
  mean /= static_cast<double>(length);
  double var = 0.0;
  for (std::size_t k = begin; k <= end; ++k) {
    const double dev = series[k * stride + offset] - mean;
    var += dev * dev;
  }
  return {mean, std::sqrt(var / static_cast<double>(length))};
}

std::size_t market_status_width(std::size_t num_indices, std::size_t num_intervals) {
  return num_indices * (1 + 4 * num_intervals);
}

MarketStatus build_market_status(const IndexSeries& series, std::size_t as_of,
                                 std::span<const std::size_t> intervals) {
  if (intervals.empty()) throw DataError("market status: empty interval set");
  std::vector<std::size_t> sorted(intervals.begin(), intervals.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DataError("market status: intervals must be positive and distinct");
  }
  if (as_of >= series.num_dates()) {
    throw DataError("market status: position " + std::to_string(as_of) +
                    " is outside the index calendar");
  }
  const std::size_t longest = sorted.back();
  if (as_of + 1 < longest) {
    throw HistoryTooShort("market history too short: " + std::to_string(longest) +
                          " days needed at " + series.dates[as_of] + ", only " +
                          std::to_string(as_of + 1) + " available (short by " +
                          std::to_string(longest - as_of - 1) + ")");
  }

  const std::size_t stride = series.num_indices();
  MarketStatus status;
  status.as_of = series.dates[as_of];
  status.values.reserve(market_status_width(stride, sorted.size()));
  for (std::size_t idx = 0; idx < stride; ++idx) {
    status.values.push_back(series.price(as_of, idx));
    for (auto length : sorted) {
      const auto s = rolling_stats(series.prices, stride, idx, as_of, length);
      status.values.push_back(s.mean);
      status.values.push_back(s.stddev);
    }
    for (auto length : sorted) {
      const auto s = rolling_stats(series.volumes, stride, idx, as_of, length);
      status.values.push_back(s.mean);
      status.values.push_back(s.stddev);
    }
  }
  return status;
}

}  // namespace master::data
