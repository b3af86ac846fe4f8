#pragma once

#include <cstddef>
#include <stdexcept>

namespace master::model {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  std::size_t num_features = 8;   // F
  std::size_t market_dim = 63;    // F'
  std::size_t hidden = 32;        // D
  std::size_t lookback = 8;       // tau
  std::size_t intra_heads = 4;    // N1
  std::size_t inter_heads = 2;    // N2
  double gate_temperature = 5.0;  // beta
  std::size_t ffn_hidden = 0;     // 0 means 2 * hidden
  bool disable_inter_stock = false;
  bool disable_gating = false;

  std::size_t ffn_width() const { return ffn_hidden == 0 ? 2 * hidden : ffn_hidden; }
  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  // Compares the effective FFN width, so 0 and 2 * hidden are equal.
  bool operator==(const ModelConfig& other) const;
};

}  // namespace master::model
