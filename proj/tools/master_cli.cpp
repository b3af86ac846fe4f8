// Command-line driver: generate, train, evaluate, backtest, explain.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "master/cli/commands.hpp"
#include "master/cli/run_config.hpp"

namespace {

master::cli::RunConfig effective_config(const std::string& path, std::optional<std::uint64_t> seed,
                                        const std::vector<std::string>& ablations) {
  using master::cli::ConfigError;
  auto config = path.empty() ? master::cli::parse_run_config("{}")
                             : master::cli::load_run_config(path);
  if (seed) config.train.seed = *seed;
  for (const auto& a : ablations) {
    if (a == "gating") {
      config.model.disable_gating = true;
    } else if (a == "inter_stock") {
      config.model.disable_inter_stock = true;
    } else {
      throw ConfigError("--ablate expects gating or inter_stock, got '" + a + "'");
    }
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Market-guided stock transformer: data, training, evaluation, explanation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "runs";
  std::vector<std::string> ablations;
  std::string checkpoint;
  std::string date;
  std::string target;
  std::string source;

  app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Overrides train.seed");
  app.add_option("--out", out_dir, "Parent directory for run directories")->capture_default_str();
  app.add_option("--ablate", ablations, "gating and/or inter_stock")
      ->check(CLI::IsMember({"gating", "inter_stock"}));

  auto* generate = app.add_subcommand("generate", "Write a synthetic market (stocks, index, truth)");
  auto* train = app.add_subcommand("train", "Train and write checkpoint and history");
  auto* evaluate = app.add_subcommand("evaluate", "Ranking metrics and backtest on the test split");
  auto* backtest = app.add_subcommand("backtest", "Same as evaluate, portfolio summary only");
  auto* explain = app.add_subcommand("explain", "Export inter-stock and cross-time attention maps");
  for (auto* sub : {evaluate, backtest, explain})
    sub->add_option("--checkpoint", checkpoint, "Checkpoint from train")
        ->required()
        ->check(CLI::ExistingFile);
  explain->add_option("--date", date, "Test-split prediction date (overrides explain.date)");
  explain->add_option("--target", target, "Target stock id u (overrides explain.target)");
  explain->add_option("--source", source, "Source stock id v (overrides explain.source)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = effective_config(config_path, seed, ablations);
    if (!date.empty()) config.explain.date = date;
    if (!target.empty()) config.explain.target = target;
    if (!source.empty()) config.explain.source = source;

    std::cout << master::cli::dump_run_config(config);
    if (generate->parsed()) master::cli::cmd_generate(config, out_dir, std::cout);
    if (train->parsed()) master::cli::cmd_train(config, out_dir, std::cout);
    if (evaluate->parsed()) master::cli::cmd_evaluate(config, out_dir, checkpoint, std::cout);
    if (backtest->parsed()) master::cli::cmd_evaluate(config, out_dir, checkpoint, std::cout, true);
    if (explain->parsed()) master::cli::cmd_explain(config, out_dir, checkpoint, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
