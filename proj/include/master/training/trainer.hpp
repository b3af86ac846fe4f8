#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "master/market_data/panel.hpp"
#include "master/model/config.hpp"
#include "master/model/params.hpp"
#include "master/training/optimizer.hpp"

namespace master::train {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kUnlimitedPatience = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
  std::size_t max_epochs = 40;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  AdamConfig optimizer;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;    // 1-based
  double train_loss = 0.0;  // mean over dates of the summed squared error
  double valid_ic = 0.0;
};

struct TrainResult {
  model::ModelParams best;
  std::size_t best_epoch = 0;
  double best_valid_ic = 0.0;
  std::vector<EpochRecord> history;
  bool stopped_early = false;
};

// Called after every epoch; for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

// One optimizer step per prediction date, dates shuffled each epoch by the
// seed. The returned parameters are the epoch with the highest validation
// IC; ties keep the earlier epoch. `initial` is not modified.
TrainResult train(std::span<const data::SampleWindow> train_windows,
                  std::span<const data::SampleWindow> valid_windows,
                  const model::ModelConfig& config, const model::ModelParams& initial,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

// epoch,train_loss,valid_ic
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

}  // namespace master::train
