#include "master/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "master/evaluation/metrics.hpp"
#include "master/evaluation/report.hpp"
#include "master/market_data/csv_io.hpp"
#include "master/model/master_model.hpp"
#include "master/numerics/random.hpp"
#include "master/training/loss.hpp"

namespace master::train {

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (!(optimizer.lr > 0.0)) throw std::invalid_argument("train config: lr must be positive");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw std::invalid_argument("train config: moment decays must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw std::invalid_argument("train config: eps must be positive");
  if (optimizer.clip_norm < 0.0) throw std::invalid_argument("train config: clip_norm is negative");
}

TrainResult train(std::span<const data::SampleWindow> train_windows,
                  std::span<const data::SampleWindow> valid_windows,
                  const model::ModelConfig& config, const model::ModelParams& initial,
                  const TrainConfig& train_config, const EpochCallback& on_epoch) {
  train_config.validate();
  config.validate();
  if (train_windows.empty()) throw TrainingError("train: no training windows");
  if (valid_windows.empty()) throw TrainingError("train: no validation windows");
  initial.check_shapes(config);

  model::ModelParams params = initial.clone();
  const auto named = params.named();
  OptimizerState state;
  Rng rng(train_config.seed);
  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const auto& window = train_windows[idx];
      try {
        params.zero_grad();
        auto out = model::forward(window, params, config);
        auto loss = mse_loss(out.prediction, window.labels);
        if (!std::isfinite(loss.item())) throw nn::NonFiniteError("loss is not finite");
        nn::backward(loss);
        optimizer_step(named, state, train_config.optimizer);
        loss_sum += loss.item();
      } catch (const nn::NonFiniteError& e) {
        throw TrainingError("training aborted at epoch " + std::to_string(epoch) + ", date " +
                            window.prediction_date + ": " + e.what());
      }
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train_windows.size());
    record.valid_ic = eval::mean_ic(eval::predict_windows(valid_windows, params, config, {}));
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (epoch == 1 || record.valid_ic > result.best_valid_ic) {
      result.best = params.clone();
      result.best_epoch = epoch;
      result.best_valid_ic = record.valid_ic;
      stale = 0;
    } else if (++stale >= train_config.patience) {
      result.stopped_early = epoch < train_config.max_epochs;
      break;
    }
  }
  return result;
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data::DataError("cannot write " + path.string());
  out << "epoch,train_loss,valid_ic\n";
  for (const auto& r : history)
    out << r.epoch << ',' << data::format_decimal(r.train_loss) << ','
        << data::format_decimal(r.valid_ic) << '\n';
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data::DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "epoch,train_loss,valid_ic") throw data::DataError(path.string() + ": bad header");
  std::vector<EpochRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = data::split_csv_line(line);
    if (cells.size() != 3) throw data::DataError(path.string() + ": malformed row '" + line + "'");
    out.push_back({static_cast<std::size_t>(data::parse_decimal(cells[0])),
                   data::parse_decimal(cells[1]), data::parse_decimal(cells[2])});
  }
  return out;
}

}  // namespace master::train
