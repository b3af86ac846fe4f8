#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "master/market_data/panel.hpp"

namespace master::data {

// Cross-sections with population std below this normalize to zeros.
inline constexpr double kVarianceEpsilon = 1e-12;

// (c[window_end + horizon] - c[window_end + 1]) / c[window_end + 1] for every
// stock, with day indices into the panel calendar. Note horizon == 1 gives
// an identically zero label.
std::vector<double> compute_return_ratio(const Panel& panel, std::size_t window_end,
                                         std::size_t horizon);

// Daily z-score with population standard deviation.
std::vector<double> normalize_labels(std::span<const double> raw);

}  // namespace master::data
