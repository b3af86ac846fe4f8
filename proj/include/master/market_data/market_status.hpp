#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "master/market_data/panel.hpp"

namespace master::data {

struct RollingStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Mean and population std of the `length` values ending at `end` (inclusive)
// in a strided series: series[k * stride + offset].
RollingStats rolling_stats(std::span<const double> series, std::size_t stride,
                           std::size_t offset, std::size_t end, std::size_t length);

// |S'| * (1 + 4 |d'|)
std::size_t market_status_width(std::size_t num_indices, std::size_t num_intervals);

// Per index, in series order:
//   [price at as_of]
//   ++ for each interval ascending: [price mean, price std]
//   ++ for each interval ascending: [volume mean, volume std]
// Windows end at as_of inclusive. `as_of` is a position in the index
// calendar.
MarketStatus build_market_status(const IndexSeries& series, std::size_t as_of,
                                 std::span<const std::size_t> intervals);

}  // namespace master::data
