#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "master/market_data/panel.hpp"

namespace master::data {

struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t num_stocks = 30;
  std::size_t num_days = 600;
  std::size_t num_features = 8;        // >= 3
  double leader_fraction = 0.2;
  std::size_t lag = 2;
  double signal_strength = 0.8;        // follower loading on the lagged leader shock
  double leader_autocorrelation = 0.1; // AR(1) coefficient of leader shocks
  double volatility = 0.02;            // idiosyncratic daily return scale
  double market_volatility = 0.01;     // common factor shared by every stock
  std::size_t num_indices = 3;
  // Used only to validate the request against downstream windowing.
  std::size_t lookback = 8;
  std::size_t history_days = 60;
};

// Planted dependency: follower return at day t loads `weight` on the
// leader's standardized shock at day t - lag.
struct LeadLagLink {
  std::string follower;
  std::string leader;
  std::size_t lag = 0;
  double weight = 0.0;
};

struct SyntheticMarket {
  Panel panel;
  IndexSeries index;
  std::vector<LeadLagLink> truth;
};

// Deterministic for a fixed config. Feature layout per stock and day:
//   f_0      standardized same-day return
//   f_1      role flag (+1 leader, -1 follower)
//   f_2..    leader-group signature plus small daily noise
// Index k is the equal-weight mean close and summed volume of the stocks
// whose position is congruent to k modulo num_indices.
SyntheticMarket generate_synthetic(const SyntheticConfig& config);

// Weekday calendar of `count` ISO dates starting at 2020-01-01.
std::vector<std::string> business_days(std::size_t count);

}  // namespace master::data
