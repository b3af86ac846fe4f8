#pragma once
// Small synthetic markets shared by the tests.

#include "master/market_data/market_status.hpp"
#include "master/market_data/synthetic.hpp"
#include "master/market_data/windows.hpp"
#include "master/model/config.hpp"

namespace fixture {

struct Small {
  master::data::SyntheticMarket market;
  master::data::WindowSet windows;
  master::model::ModelConfig config;
};

inline Small small_market(std::size_t stocks = 6, std::size_t days = 120, std::uint64_t seed = 5) {
  master::data::SyntheticConfig syn;
  syn.seed = seed;
  syn.num_stocks = stocks;
  syn.num_days = days;
  syn.num_features = 4;
  syn.lookback = 4;
  syn.lag = 2;
  syn.history_days = 10;
  syn.num_indices = 2;
  Small s;
  s.market = master::data::generate_synthetic(syn);
  master::data::WindowConfig wc{4, 2, {5, 10}, true};
  s.windows = master::data::build_windows(s.market.panel, s.market.index, wc,
                                          master::data::split_by_fraction(days, 0.6, 0.2));
  s.config.num_features = 4;
  s.config.market_dim = master::data::market_status_width(2, 2);
  s.config.hidden = 8;
  s.config.lookback = 4;
  s.config.intra_heads = 2;
  s.config.inter_heads = 2;
  s.config.gate_temperature = 2.0;
  return s;
}

}  // namespace fixture
