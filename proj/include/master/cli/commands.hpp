#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "master/cli/run_config.hpp"
#include "master/explain/cross_time.hpp"
#include "master/market_data/csv_io.hpp"
#include "master/market_data/windows.hpp"
#include "master/model/config.hpp"
#include "master/model/params.hpp"

namespace master::cli {

// Market data plus windows for every split, per the config.
struct PreparedData {
  data::MarketData market;
  data::SplitSpec split;
  data::WindowSet windows;
};

PreparedData prepare_data(const RunConfig& config);

// Model config with F and F' filled in from the data.
model::ModelConfig resolve_model_config(const RunConfig& config, const data::MarketData& market);

// Starting parameters of cmd_train for a given train seed.
model::ModelParams initial_params(const model::ModelConfig& config, std::uint64_t train_seed);

// Cross-time map of target <- source, averaged over the windows.
explain::Matrix mean_cross_time_map(std::span<const data::SampleWindow> windows,
                                    const model::ModelParams& params,
                                    const model::ModelConfig& config, std::size_t target,
                                    std::size_t source, const explain::HeadSelection& heads = {});

// Creates <out>/<command>_<hash8>_<timestamp>[_n] and writes the effective
// config into it as config.json.
std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command,
                                   const RunConfig& config);

// Each command returns its run directory. Progress goes to `log`.
std::filesystem::path cmd_generate(const RunConfig& config, const std::filesystem::path& out,
                                   std::ostream& log);
std::filesystem::path cmd_train(const RunConfig& config, const std::filesystem::path& out,
                                std::ostream& log);
// backtest_only prints only the portfolio section; the files are the same.
std::filesystem::path cmd_evaluate(const RunConfig& config, const std::filesystem::path& out,
                                   const std::filesystem::path& checkpoint, std::ostream& log,
                                   bool backtest_only = false);
std::filesystem::path cmd_explain(const RunConfig& config, const std::filesystem::path& out,
                                  const std::filesystem::path& checkpoint, std::ostream& log);

}  // namespace master::cli
