#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "master/model/config.hpp"

namespace master::model {

struct FlopProfile {
  double total = 0.0;
  // Score, softmax and mixing work of the inter-stock attention, counted
  // during a real forward pass.
  double inter_stock_pairwise = 0.0;
  double inter_stock = 0.0;
  std::map<std::string, double> by_scope;
};

// Runs one forward pass on random inputs of `num_stocks` stocks with a
// FLOP counter installed.
FlopProfile profile_forward(const ModelConfig& config, std::size_t num_stocks,
                            std::uint64_t seed = 1);

// Closed-form cost of the pairwise part of per-step attention over M stocks
// repeated for tau steps (what the model runs).
double inter_stock_pairwise_flops(std::size_t num_stocks, std::size_t lookback,
                                  std::size_t hidden, std::size_t heads);

// Cost of the same pairwise work if all tau * M tokens attended jointly.
// Priced with the same per-primitive costs; never executed.
double joint_attention_pairwise_flops(std::size_t num_stocks, std::size_t lookback,
                                      std::size_t hidden, std::size_t heads);

}  // namespace master::model
