#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "master/cli/commands.hpp"
#include "master/cli/run_config.hpp"
#include "master/evaluation/report.hpp"
#include "master/explain/heatmap.hpp"
#include "master/model/checkpoint.hpp"
#include "master/training/trainer.hpp"

using namespace master;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTinyConfig = R"({
  "data": {"synthetic": {"seed": 3, "num_stocks": 8, "num_days": 120, "num_features": 4,
                         "num_indices": 2}},
  "windows": {"lookback": 4, "horizon": 2, "intervals": [5, 10]},
  "model": {"hidden": 8, "intra_heads": 2, "inter_heads": 2},
  "train": {"max_epochs": 3, "seed": 11},
  "evaluation": {"top_k": 3},
  "explain": {"target": "S002", "source": "S002"}
})";

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("master_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::size_t count_lines(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

int run_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MASTER_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config parsing") {
  auto defaults = cli::parse_run_config("{}");
  CHECK(defaults.windows.lookback == 8);
  CHECK(defaults.windows.horizon == 5);
  CHECK(defaults.backtest.top_k == 30);
  CHECK(defaults.train.max_epochs == 40);
  CHECK(defaults.model.intra_heads == 4);
  CHECK(defaults.model.inter_heads == 2);

  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"model": {"hiden": 4}})"),
                       doctest::Contains("config.model.hiden"), cli::ConfigError);
  CHECK_THROWS_WITH_AS(cli::parse_run_config(R"({"train": {"lr": "fast"}})"),
                       doctest::Contains("config.train.lr"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config(R"({"model": {"hidden": 6, "intra_heads": 4}})"),
                  cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config("{not json"), cli::ConfigError);

  auto tiny = cli::parse_run_config(kTinyConfig);
  const auto dumped = cli::dump_run_config(tiny);
  CHECK(cli::dump_run_config(cli::parse_run_config(dumped)) == dumped);
  CHECK(cli::config_hash(tiny) == cli::config_hash(cli::parse_run_config(dumped)));
  CHECK(cli::config_hash(tiny) != cli::config_hash(defaults));
  CHECK(cli::config_hash(tiny).size() == 8);
}

TEST_CASE("cmd_generate") {
  auto out = fresh_dir("generate");
  std::ostringstream log;
  auto config = cli::parse_run_config("{}");
  auto a = cli::cmd_generate(config, out, log);
  auto b = cli::cmd_generate(config, out, log);
  CHECK(a != b);
  for (const char* f : {"stocks.csv", "index.csv", "truth.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(count_lines(a / "stocks.csv") == 1 + 30 * 600);
  auto market = data::load_csv(a / "stocks.csv", a / "index.csv");
  CHECK(market.panel.num_stocks() == 30);
  CHECK(market.panel.num_dates() == 600);
  CHECK(fs::exists(a / "config.json"));
}

TEST_CASE("cmd_train, cmd_evaluate and cmd_explain on the tiny fixture") {
  auto out = fresh_dir("pipeline");
  std::ostringstream log;
  auto config = cli::parse_run_config(kTinyConfig);

  const auto start = std::chrono::steady_clock::now();
  auto run = cli::cmd_train(config, out, log);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 60.0);
  REQUIRE(fs::exists(run / "checkpoint.bin"));
  CHECK(train::read_history_csv(run / "history.csv").size() == 3);

  auto again = cli::cmd_train(config, out, log);
  CHECK(slurp(run / "checkpoint.bin") == slurp(again / "checkpoint.bin"));
  CHECK(slurp(run / "history.csv") == slurp(again / "history.csv"));

  auto eval_dir = cli::cmd_evaluate(config, out, run / "checkpoint.bin", log);
  CHECK(listing(eval_dir) == std::vector<std::string>{"config.json", "daily.csv", "metrics.csv"});
  auto metrics = eval::read_metrics_csv(eval_dir / "metrics.csv");
  REQUIRE(metrics.size() == 6);
  const std::vector<std::string> names{"IC", "ICIR", "RankIC", "RankICIR", "AR", "IR"};
  for (std::size_t i = 0; i < 6; ++i) CHECK(metrics[i].first == names[i]);
  const auto prepared = cli::prepare_data(config);
  CHECK(count_lines(eval_dir / "daily.csv") == 1 + prepared.windows.test.size());

  SUBCASE("zero-initialized model has no skill") {
    const auto mc = cli::resolve_model_config(config, prepared.market);
    model::save_checkpoint(out / "zeros.bin", mc, model::ModelParams::zeros(mc));
    auto dir = cli::cmd_evaluate(config, out, out / "zeros.bin", log);
    CHECK(std::abs(eval::read_metrics_csv(dir / "metrics.csv")[0].second) < 0.1);
  }
  SUBCASE("incompatible checkpoint is refused") {
    auto other = config;
    other.windows.lookback = 5;
    CHECK_THROWS_WITH_AS(cli::cmd_evaluate(other, out, run / "checkpoint.bin", log),
                         doctest::Contains("lookback"), cli::ConfigError);
  }
  SUBCASE("explain with u = v") {
    auto dir = cli::cmd_explain(config, out, run / "checkpoint.bin", log);
    auto cross = explain::read_matrix_csv(dir / "explain_I_S002_S002.csv");
    REQUIRE(cross.rows == config.windows.lookback);
    for (std::size_t i = 0; i < cross.rows; ++i) {
      auto s2 = explain::read_matrix_csv(dir / ("explain_S2_t" + std::to_string(i) + ".csv"));
      double row = 0.0;
      for (std::size_t j = 0; j < cross.cols; ++j) row += cross.at(i, j);
      CHECK(std::abs(row - s2.at(2, 2)) < 1e-9);
    }
    auto pgm = explain::read_pgm(dir / "explain_I_S002_S002.pgm");
    CHECK(pgm.pixels == explain::heatmap_pixels(cross, explain::Normalization::global_max));
    CHECK(fs::exists(dir / "explain_I_S002_S002_lag_bands.csv"));

    auto bad = config;
    bad.explain.date = "1999-01-01";
    CHECK_THROWS_AS(cli::cmd_explain(bad, out, run / "checkpoint.bin", log), cli::ConfigError);
    bad = config;
    bad.explain.target = "NOPE";
    CHECK_THROWS(cli::cmd_explain(bad, out, run / "checkpoint.bin", log));
  }
}

TEST_CASE("master binary end to end") {
  auto out = fresh_dir("binary");
  std::ofstream(out / "config.json") << kTinyConfig;
  const std::string common = "--config " + (out / "config.json").string() + " --out " + (out / "runs").string();

  CHECK(run_binary(common + " --ablate inter_stock train", out / "train.log") == 0);
  fs::path run;
  for (const auto& e : fs::directory_iterator(out / "runs"))
    if (e.path().filename().string().rfind("train_", 0) == 0) run = e.path();
  REQUIRE(!run.empty());
  auto ckpt = model::load_checkpoint(run / "checkpoint.bin");
  CHECK(ckpt.config.disable_inter_stock);
  CHECK_FALSE(ckpt.config.disable_gating);
  CHECK(slurp(out / "train.log").find("\"disable_inter_stock\": true") != std::string::npos);

  CHECK(run_binary(common + " --ablate inter_stock backtest --checkpoint " + (run / "checkpoint.bin").string(),
                   out / "backtest.log") == 0);
  CHECK(slurp(out / "backtest.log").find("AR ") != std::string::npos);

  CHECK(run_binary(common + " --ablate nonsense train", out / "bad.log") != 0);
  CHECK(run_binary(common + " evaluate --checkpoint " + (out / "missing.bin").string(), out / "bad2.log") != 0);
  std::ofstream(out / "broken.json") << R"({"train": {"unknown_key": 1}})";
  CHECK(run_binary("--config " + (out / "broken.json").string() + " --out " + (out / "runs").string() + " train",
                   out / "bad3.log") == 1);
  CHECK(slurp(out / "bad3.log").find("config.train.unknown_key") != std::string::npos);
}
