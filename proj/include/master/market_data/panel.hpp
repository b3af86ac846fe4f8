#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "master/numerics/tensor.hpp"

namespace master::data {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LabelUnavailable : public DataError {
 public:
  using DataError::DataError;
};

class HistoryTooShort : public DataError {
 public:
  using DataError::DataError;
};

class NoEligibleWindows : public DataError {
 public:
  using DataError::DataError;
};

// Date x stock x feature market universe. Dates are the trading calendar;
// positional day arithmetic is done on their indices.
struct Panel {
  std::vector<std::string> dates;   // strictly increasing ISO-8601
  std::vector<std::string> stocks;
  std::size_t num_features = 0;
  std::vector<double> features;     // [date][stock][feature]
  std::vector<double> closes;       // [date][stock], > 0

  std::size_t num_dates() const { return dates.size(); }
  std::size_t num_stocks() const { return stocks.size(); }

  double feature(std::size_t date, std::size_t stock, std::size_t f) const {
    return features[(date * stocks.size() + stock) * num_features + f];
  }
  double& feature(std::size_t date, std::size_t stock, std::size_t f) {
    return features[(date * stocks.size() + stock) * num_features + f];
  }
  double close(std::size_t date, std::size_t stock) const {
    return closes[date * stocks.size() + stock];
  }
  double& close(std::size_t date, std::size_t stock) {
    return closes[date * stocks.size() + stock];
  }

  // Allocates zero-filled storage for the current dates/stocks/num_features.
  void resize_storage();
  // Throws DataError on any broken invariant.
  void validate() const;
  std::size_t stock_index(const std::string& id) const;
  std::size_t date_index(const std::string& date) const;
};

// Market indices (the S' set) on their own trading calendar.
struct IndexSeries {
  std::vector<std::string> dates;
  std::vector<std::string> indices;
  std::vector<double> prices;   // [date][index], > 0
  std::vector<double> volumes;  // [date][index], >= 0

  std::size_t num_dates() const { return dates.size(); }
  std::size_t num_indices() const { return indices.size(); }
  double price(std::size_t date, std::size_t index) const {
    return prices[date * indices.size() + index];
  }
  double volume(std::size_t date, std::size_t index) const {
    return volumes[date * indices.size() + index];
  }

  void validate() const;
  // Position of `date` in this calendar, or npos.
  std::size_t find_date(const std::string& date) const;
};

struct MarketStatus {
  std::vector<double> values;
  std::string as_of;
};

// One prediction date's model input and labels.
struct SampleWindow {
  std::string prediction_date;
  std::size_t date_index = 0;     // position in the panel calendar
  nn::Tensor features;            // [M, lookback, F]
  MarketStatus market;
  std::vector<double> labels;     // daily z-scored return ratios
  std::vector<double> raw_returns;
};

// Inclusive range of panel date indices.
struct DateRange {
  std::size_t first = 0;
  std::size_t last = 0;

  bool contains(std::size_t i) const { return i >= first && i <= last; }
  std::size_t length() const { return last - first + 1; }
};

struct SplitSpec {
  DateRange train;
  DateRange valid;
  DateRange test;

  // Ranges must be non-empty, disjoint and ordered train < valid < test.
  void validate(std::size_t num_dates) const;
};

// Chronological split by fractions of the calendar; test takes the rest.
SplitSpec split_by_fraction(std::size_t num_dates, double train_fraction,
                            double valid_fraction);

}  // namespace master::data
