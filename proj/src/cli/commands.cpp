#include "master/cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include "master/evaluation/report.hpp"
#include "master/explain/cross_time.hpp"
#include "master/explain/heatmap.hpp"
#include "master/market_data/market_status.hpp"
#include "master/model/checkpoint.hpp"
#include "master/model/master_model.hpp"
#include "master/training/trainer.hpp"

namespace master::cli {

namespace {

constexpr std::uint64_t kInitSalt = 0x9e3779b97f4a7c15ULL;

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

model::Checkpoint load_compatible(const std::filesystem::path& path,
                                  const model::ModelConfig& expected) {
  auto ckpt = model::load_checkpoint(path);
  auto mismatch = [&](const char* what, std::size_t have, std::size_t want) {
    throw ConfigError("checkpoint " + path.string() + " has " + what + " = " +
                      std::to_string(have) + " but the data implies " + std::to_string(want));
  };
  if (ckpt.config.num_features != expected.num_features)
    mismatch("num_features", ckpt.config.num_features, expected.num_features);
  if (ckpt.config.market_dim != expected.market_dim)
    mismatch("market_dim", ckpt.config.market_dim, expected.market_dim);
  if (ckpt.config.lookback != expected.lookback)
    mismatch("lookback", ckpt.config.lookback, expected.lookback);
  return ckpt;
}

}  // namespace

PreparedData prepare_data(const RunConfig& config) {
  PreparedData out;
  if (!config.stocks_csv.empty()) {
    out.market = data::load_csv(config.stocks_csv, config.index_csv, {config.missing});
  } else {
    auto syn = config.synthetic;
    syn.lookback = config.windows.lookback;
    auto market = data::generate_synthetic(syn);
    out.market = {std::move(market.panel), std::move(market.index)};
  }
  out.split = data::split_by_fraction(out.market.panel.num_dates(), config.train_fraction,
                                      config.valid_fraction);
  out.windows = data::build_windows(out.market.panel, out.market.index, config.windows, out.split);
  return out;
}

model::ModelParams initial_params(const model::ModelConfig& config, std::uint64_t train_seed) {
  return model::ModelParams::init(config, train_seed ^ kInitSalt);
}

explain::Matrix mean_cross_time_map(std::span<const data::SampleWindow> windows,
                                    const model::ModelParams& params,
                                    const model::ModelConfig& config, std::size_t target,
                                    std::size_t source, const explain::HeadSelection& heads) {
  if (windows.empty()) throw ConfigError("cross-time map: no windows to average");
  nn::NoGradGuard no_grad;
  explain::Matrix sum;
  for (const auto& w : windows) {
    const auto out = model::forward(w, params, config);
    const auto map =
        explain::cross_time_map(out.intra_attention, out.inter_attention, target, source, heads).map;
    if (sum.values.empty()) {
      sum = map;
    } else {
      for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += map.values[i];
    }
  }
  for (double& v : sum.values) v /= static_cast<double>(windows.size());
  return sum;
}

model::ModelConfig resolve_model_config(const RunConfig& config, const data::MarketData& market) {
  model::ModelConfig m = config.model;
  m.num_features = market.panel.num_features;
  m.market_dim = data::market_status_width(market.index.num_indices(), config.windows.intervals.size());
  m.lookback = config.windows.lookback;
  m.validate();
  return m;
}

std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command,
                                   const RunConfig& config) {
  const std::string base = command + "_" + config_hash(config) + "_" + timestamp();
  std::filesystem::path dir = out / base;
  for (int n = 1; std::filesystem::exists(dir); ++n) dir = out / (base + "_" + std::to_string(n));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "config.json") << dump_run_config(config);
  return dir;
}

std::filesystem::path cmd_generate(const RunConfig& config, const std::filesystem::path& out,
                                   std::ostream& log) {
  auto syn = config.synthetic;
  syn.lookback = config.windows.lookback;
  const auto market = data::generate_synthetic(syn);
  const auto dir = make_run_dir(out, "generate", config);
  data::write_stocks_csv(market.panel, dir / "stocks.csv");
  data::write_index_csv(market.index, dir / "index.csv");
  data::write_truth_csv(market.truth, dir / "truth.csv");
  // Check the files parse back before reporting success.
  data::load_csv(dir / "stocks.csv", dir / "index.csv");
  data::read_truth_csv(dir / "truth.csv");
  log << "wrote " << market.panel.num_stocks() << " stocks x " << market.panel.num_dates()
      << " days to " << dir.string() << "\n";
  return dir;
}

std::filesystem::path cmd_train(const RunConfig& config, const std::filesystem::path& out,
                                std::ostream& log) {
  const auto prepared = prepare_data(config);
  const auto model_config = resolve_model_config(config, prepared.market);
  const auto initial = initial_params(model_config, config.train.seed);
  const auto dir = make_run_dir(out, "train", config);
  log << "train " << prepared.windows.train.size() << " dates, valid "
      << prepared.windows.valid.size() << " dates\n";
  const auto result = train::train(prepared.windows.train, prepared.windows.valid, model_config,
                                   initial, config.train, [&](const train::EpochRecord& r) {
                                     log << "epoch " << r.epoch << " loss " << r.train_loss
                                         << " valid_ic " << r.valid_ic << "\n";
                                   });
  model::save_checkpoint(dir / "checkpoint.bin", model_config, result.best);
  train::write_history_csv(result.history, dir / "history.csv");
  model::load_checkpoint(dir / "checkpoint.bin");
  log << "best epoch " << result.best_epoch << " valid_ic " << result.best_valid_ic << "\n"
      << "run directory " << dir.string() << "\n";
  return dir;
}

std::filesystem::path cmd_evaluate(const RunConfig& config, const std::filesystem::path& out,
                                   const std::filesystem::path& checkpoint, std::ostream& log,
                                   bool backtest_only) {
  const auto prepared = prepare_data(config);
  const auto ckpt = load_compatible(checkpoint, resolve_model_config(config, prepared.market));
  auto daily = eval::predict_windows(prepared.windows.test, ckpt.params, ckpt.config,
                                     prepared.market.panel.stocks);
  if (config.backtest.benchmark == eval::Benchmark::index) {
    eval::attach_index_benchmark(daily, prepared.market.panel, prepared.market.index,
                                 config.benchmark_index, config.windows.horizon);
  }
  const auto report = eval::evaluate(daily, config.backtest);
  const auto dir = make_run_dir(out, backtest_only ? "backtest" : "evaluate", config);
  eval::write_metric_report(report, dir);
  for (const auto& w : report.backtest.warnings) log << "warning: " << w << "\n";
  if (!backtest_only) {
    log << "IC " << report.ranking.ic << " ICIR " << report.ranking.icir
        << (report.ranking.icir_degenerate ? " (degenerate)" : "") << " RankIC "
        << report.ranking.rank_ic << " RankICIR " << report.ranking.rank_icir
        << (report.ranking.rank_icir_degenerate ? " (degenerate)" : "") << "\n";
    if (report.ranking.degenerate_days > 0) {
      log << "warning: " << report.ranking.degenerate_days
          << " dates had constant scores or labels; their correlation counts as 0\n";
    }
  }
  log << "AR " << report.backtest.annualized_return << " IR " << report.backtest.information_ratio
      << (report.backtest.ir_degenerate ? " (degenerate)" : "") << "\n"
      << "run directory " << dir.string() << "\n";
  return dir;
}

std::filesystem::path cmd_explain(const RunConfig& config, const std::filesystem::path& out,
                                  const std::filesystem::path& checkpoint, std::ostream& log) {
  const auto prepared = prepare_data(config);
  const auto ckpt = load_compatible(checkpoint, resolve_model_config(config, prepared.market));
  const auto& panel = prepared.market.panel;
  const auto& test = prepared.windows.test;
  const data::SampleWindow* window = &test.back();
  if (!config.explain.date.empty()) {
    window = nullptr;
    for (const auto& w : test)
      if (w.prediction_date == config.explain.date) window = &w;
    if (!window) {
      throw ConfigError("explain.date " + config.explain.date +
                        " is not an eligible prediction date of the test split (" +
                        test.front().prediction_date + " .. " + test.back().prediction_date + ")");
    }
  }
  if (config.explain.target.empty() || config.explain.source.empty()) {
    throw ConfigError("explain needs explain.target and explain.source stock ids");
  }
  const auto target = panel.stock_index(config.explain.target);
  const auto source = panel.stock_index(config.explain.source);

  nn::NoGradGuard no_grad;
  const auto result = model::forward(*window, ckpt.params, ckpt.config);
  const explain::HeadSelection heads{config.explain.intra_head, config.explain.inter_head};
  const auto dir = make_run_dir(out, "explain", config);
  for (std::size_t t = 0; t < ckpt.config.lookback; ++t) {
    const auto map = explain::inter_stock_map(result.inter_attention, t, heads);
    explain::write_matrix_csv(map, dir / ("explain_S2_t" + std::to_string(t) + ".csv"));
  }
  const auto cross = explain::cross_time_map(result.intra_attention, result.inter_attention,
                                             target, source, heads);
  const auto stem = "explain_I_" + config.explain.target + "_" + config.explain.source;
  explain::export_heatmap(cross.map, dir / (stem + ".pgm"), config.explain.normalization);
  if (explain::read_matrix_csv(dir / (stem + ".csv")) != cross.map) {
    throw std::runtime_error("explain: written matrix does not read back identically");
  }
  // Lag-band profile of the map averaged over every test date.
  const auto profile = explain::lag_band_profile(
      mean_cross_time_map(test, ckpt.params, ckpt.config, target, source, heads));
  {
    std::ofstream bands(dir / (stem + "_lag_bands.csv"));
    bands << "band_first_lag,band_last_lag,mean_mass\n";
    for (std::size_t b = 0; b < profile.mass.size(); ++b) {
      const int lo = profile.first_lag + static_cast<int>(b);
      bands << lo << "," << lo + 2 << "," << data::format_decimal(profile.mass[b]) << "\n";
    }
    if (!bands) throw std::runtime_error("explain: cannot write lag-band profile in " + dir.string());
  }
  log << "explained " << config.explain.target << " <- " << config.explain.source << " on "
      << window->prediction_date << " (heads: " << cross.head_mode << ")\n"
      << "strongest lag band over " << test.size() << " test dates: i - j in [" << profile.peak_lag()
      << ", " << profile.peak_lag() + 2 << "]\n"
      << "run directory " << dir.string() << "\n";
  return dir;
}

}  // namespace master::cli
