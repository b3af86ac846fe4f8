#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "master/market_data/panel.hpp"

namespace master::data {

struct WindowConfig {
  std::size_t lookback = 8;                          // tau
  std::size_t horizon = 5;                           // d
  std::vector<std::size_t> intervals{5, 10, 20, 30, 60};  // d' set
  // When false, train/valid labels may reach into the following split.
  bool strict_labels = true;
};

enum class SplitRole { train, valid, test };
std::string_view to_string(SplitRole role);

struct WindowSet {
  std::vector<SampleWindow> train;
  std::vector<SampleWindow> valid;
  std::vector<SampleWindow> test;
};

// Index-calendar position of every panel date. Throws DataError naming the
// first panel date the index series lacks.
std::vector<std::size_t> align_calendars(const Panel& panel, const IndexSeries& series);

// Prediction dates p in `range` with a full lookback (p + 1 >= tau), enough
// index history (position + 1 >= max d') and a label horizon p + d inside the
// range, or inside the panel when `allow_label_overrun`.
std::vector<std::size_t> eligible_dates(std::size_t num_dates,
                                        const std::vector<std::size_t>& index_positions,
                                        const WindowConfig& config, DateRange range,
                                        bool allow_label_overrun);

SampleWindow build_window(const Panel& panel, const IndexSeries& series,
                          std::size_t index_position, const WindowConfig& config,
                          std::size_t prediction_date);

std::vector<SampleWindow> build_windows(const Panel& panel, const IndexSeries& series,
                                        const WindowConfig& config, DateRange range,
                                        SplitRole role);

// Windows for all three splits in date order. An empty split raises
// NoEligibleWindows.
WindowSet build_windows(const Panel& panel, const IndexSeries& series,
                        const WindowConfig& config, const SplitSpec& split);

}  // namespace master::data
