#include "master/market_data/labels.hpp"

#include <cmath>
#include <string>

namespace master::data {

std::vector<double> compute_return_ratio(const Panel& panel, std::size_t window_end,
                                         std::size_t horizon) {
  if (horizon == 0) throw DataError("return ratio: horizon must be at least 1");
  const std::size_t base_day = window_end + 1;
  const std::size_t end_day = window_end + horizon;
  if (end_day >= panel.num_dates()) {
    throw LabelUnavailable("label unavailable: day " + std::to_string(end_day) +
                           " is past the end of the " + std::to_string(panel.num_dates()) +
                           "-day calendar");
  }
  std::vector<double> out(panel.num_stocks());
  for (std::size_t u = 0; u < panel.num_stocks(); ++u) {
    const double base = panel.close(base_day, u);
    if (!(base > 0.0)) {
      throw DataError("return ratio: non-positive base price for " + panel.stocks[u] + " on " +
                      panel.dates[base_day]);
    }
    out[u] = (panel.close(end_day, u) - base) / base;
  }
  return out;
}

std::vector<double> normalize_labels(std::span<const double> raw) {
  if (raw.empty()) throw DataError("normalize_labels: empty cross-section");
  const auto n = static_cast<double>(raw.size());
  double mean = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw DataError("normalize_labels: non-finite return ratio");
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : raw) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(raw.size(), 0.0);
  if (sd < kVarianceEpsilon) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean) / sd;
  return out;
}

}  // namespace master::data
