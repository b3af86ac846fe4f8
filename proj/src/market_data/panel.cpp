#include "master/market_data/panel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace master::data {

namespace {

void check_dates(const std::vector<std::string>& dates, const char* what) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw DataError(std::string(what) + ": dates not strictly increasing at '" + dates[i] +
                      "' (after '" + dates[i - 1] + "')");
    }
  }
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw DataError(std::string(what) + ": duplicate identifier '" + id + "'");
    }
  }
}

}  // namespace

void Panel::resize_storage() {
  features.assign(dates.size() * stocks.size() * num_features, 0.0);
  closes.assign(dates.size() * stocks.size(), 0.0);
}

void Panel::validate() const {
  check_dates(dates, "panel");
  check_unique(stocks, "panel stocks");
  if (features.size() != dates.size() * stocks.size() * num_features ||
      closes.size() != dates.size() * stocks.size()) {
    throw DataError("panel: storage does not match the date x stock x feature grid");
  }
  for (std::size_t d = 0; d < dates.size(); ++d) {
    for (std::size_t s = 0; s < stocks.size(); ++s) {
      const double c = close(d, s);
      if (!std::isfinite(c) || c <= 0.0) {
        throw DataError("panel: close for " + stocks[s] + " on " + dates[d] +
                        " must be finite and positive, got " + std::to_string(c));
      }
      for (std::size_t f = 0; f < num_features; ++f) {
        if (!std::isfinite(feature(d, s, f))) {
          throw DataError("panel: non-finite feature f_" + std::to_string(f) + " for " +
                          stocks[s] + " on " + dates[d]);
        }
      }
    }
  }
}

std::size_t Panel::stock_index(const std::string& id) const {
  for (std::size_t i = 0; i < stocks.size(); ++i)
    if (stocks[i] == id) return i;
  throw DataError("unknown stock id '" + id + "'");
}

std::size_t Panel::date_index(const std::string& date) const {
  for (std::size_t i = 0; i < dates.size(); ++i)
    if (dates[i] == date) return i;
  throw DataError("date '" + date + "' is not in the panel calendar");
}

void IndexSeries::validate() const {
  check_dates(dates, "index series");
  check_unique(indices, "index ids");
  if (prices.size() != dates.size() * indices.size() ||
      volumes.size() != dates.size() * indices.size()) {
    throw DataError("index series: storage does not match the date x index grid");
  }
  for (std::size_t d = 0; d < dates.size(); ++d) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (!std::isfinite(price(d, i)) || price(d, i) <= 0.0) {
        throw DataError("index series: price of " + indices[i] + " on " + dates[d] +
                        " must be finite and positive");
      }
      if (!std::isfinite(volume(d, i)) || volume(d, i) < 0.0) {
        throw DataError("index series: volume of " + indices[i] + " on " + dates[d] +
                        " must be finite and non-negative");
      }
    }
  }
}

std::size_t IndexSeries::find_date(const std::string& date) const {
  // Calendar is sorted; binary search.
  auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || *it != date) return std::string::npos;
  return static_cast<std::size_t>(it - dates.begin());
}

void SplitSpec::validate(std::size_t num_dates) const {
  for (const auto* range : {&train, &valid, &test}) {
    if (range->first > range->last || range->last >= num_dates) {
      throw DataError("split: range [" + std::to_string(range->first) + ", " +
                      std::to_string(range->last) + "] is empty or outside " +
                      std::to_string(num_dates) + " dates");
    }
  }
  if (!(train.last < valid.first && valid.last < test.first)) {
    throw DataError("split: ranges must be disjoint and ordered train < valid < test");
  }
}

SplitSpec split_by_fraction(std::size_t num_dates, double train_fraction,
                            double valid_fraction) {
  if (!(train_fraction > 0.0) || !(valid_fraction > 0.0) ||
      train_fraction + valid_fraction >= 1.0) {
    throw DataError("split: fractions must be positive and leave room for a test range");
  }
  const auto n = static_cast<double>(num_dates);
  const auto train_end = static_cast<std::size_t>(std::floor(n * train_fraction));
  const auto valid_end =
      static_cast<std::size_t>(std::floor(n * (train_fraction + valid_fraction)));
  if (train_end == 0 || valid_end <= train_end || valid_end >= num_dates) {
    throw DataError("split: calendar of " + std::to_string(num_dates) +
                    " dates is too short for the requested fractions");
  }
  SplitSpec split{{0, train_end - 1}, {train_end, valid_end - 1}, {valid_end, num_dates - 1}};
  split.validate(num_dates);
  return split;
}

}  // namespace master::data
