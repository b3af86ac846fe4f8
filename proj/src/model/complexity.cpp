#include "master/model/complexity.hpp"

#include "master/model/master_model.hpp"
#include "master/numerics/flops.hpp"
#include "master/numerics/random.hpp"

namespace master::model {

namespace {

double pairwise(std::size_t batches, std::size_t tokens, std::size_t hidden, std::size_t heads) {
  const std::size_t head_dim = hidden / heads;
  return nn::cost::matmul(batches * heads, tokens, head_dim, tokens) +
         nn::cost::softmax(batches * heads * tokens, tokens) +
         nn::cost::matmul(batches * heads, tokens, tokens, head_dim);
}

}  // namespace

FlopProfile profile_forward(const ModelConfig& config, std::size_t num_stocks,
                            std::uint64_t seed) {
  const auto params = ModelParams::init(config, seed);
  Rng rng(seed + 1);
  std::vector<double> x(num_stocks * config.lookback * config.num_features);
  for (auto& v : x) v = rng.normal();
  std::vector<double> market(config.market_dim);
  for (auto& v : market) v = rng.normal();

  nn::NoGradGuard no_grad;
  nn::FlopCounter counter;
  forward(nn::Tensor({num_stocks, config.lookback, config.num_features}, std::move(x)), market,
          params, config);
  FlopProfile profile;
  profile.total = counter.total();
  profile.inter_stock = counter.under("inter_stock");
  profile.inter_stock_pairwise = counter.under("inter_stock/pairwise");
  profile.by_scope = counter.by_scope();
  return profile;
}

double inter_stock_pairwise_flops(std::size_t num_stocks, std::size_t lookback,
                                  std::size_t hidden, std::size_t heads) {
  return pairwise(lookback, num_stocks, hidden, heads);
}

double joint_attention_pairwise_flops(std::size_t num_stocks, std::size_t lookback,
                                      std::size_t hidden, std::size_t heads) {
  return pairwise(1, lookback * num_stocks, hidden, heads);
}

}  // namespace master::model
