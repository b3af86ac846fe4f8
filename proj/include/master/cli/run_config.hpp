#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "master/evaluation/backtest.hpp"
#include "master/explain/heatmap.hpp"
#include "master/market_data/csv_io.hpp"
#include "master/market_data/synthetic.hpp"
#include "master/market_data/windows.hpp"
#include "master/model/config.hpp"
#include "master/training/trainer.hpp"

namespace master::cli {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExplainSettings {
  std::string date;    // test-split prediction date; empty picks the last one
  std::string target;  // u
  std::string source;  // v
  explain::Normalization normalization = explain::Normalization::global_max;
  std::optional<std::size_t> intra_head;
  std::optional<std::size_t> inter_head;
};

// Everything a command needs. F and F' in `model` are derived from the data
// and are not config keys.
struct RunConfig {
  std::string stocks_csv;  // empty: use the synthetic section
  std::string index_csv;
  data::MissingPolicy missing = data::MissingPolicy::reject;
  data::SyntheticConfig synthetic;
  data::WindowConfig windows;
  double train_fraction = 0.6;
  double valid_fraction = 0.2;
  model::ModelConfig model;
  train::TrainConfig train;
  eval::BacktestConfig backtest;  // horizon mirrors windows.horizon
  std::string benchmark_index;    // required when backtest.benchmark is index
  ExplainSettings explain;

  void validate() const;
};

// Strict JSON reader: unknown keys and wrong types raise ConfigError with
// the key path. Missing keys keep their defaults.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
// Every key with its effective value, pretty-printed.
std::string dump_run_config(const RunConfig& config);
// First 8 hex digits of a 64-bit FNV-1a hash of the compact dump.
std::string config_hash(const RunConfig& config);

}  // namespace master::cli
