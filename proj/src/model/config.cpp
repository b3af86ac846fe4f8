#include "master/model/config.hpp"

#include <cmath>
#include <string>

namespace master::model {

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("model config: " + what);
  };
  require(num_features >= 1, "num_features must be >= 1");
  require(market_dim >= 1, "market_dim must be >= 1");
  require(hidden >= 2 && hidden % 2 == 0, "hidden must be even and >= 2 (positional encoding)");
  require(lookback >= 1, "lookback must be >= 1");
  require(intra_heads >= 1 && hidden % intra_heads == 0,
          "hidden " + std::to_string(hidden) + " must be divisible by intra_heads " +
              std::to_string(intra_heads));
  require(inter_heads >= 1 && hidden % inter_heads == 0,
          "hidden " + std::to_string(hidden) + " must be divisible by inter_heads " +
              std::to_string(inter_heads));
  require(std::isfinite(gate_temperature) && gate_temperature > 0.0,
          "gate_temperature must be positive");
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  return num_features == o.num_features && market_dim == o.market_dim && hidden == o.hidden &&
         lookback == o.lookback && intra_heads == o.intra_heads && inter_heads == o.inter_heads &&
         gate_temperature == o.gate_temperature && ffn_width() == o.ffn_width() &&
         disable_inter_stock == o.disable_inter_stock && disable_gating == o.disable_gating;
}

}  // namespace master::model
