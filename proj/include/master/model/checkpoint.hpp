#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "master/model/config.hpp"
#include "master/model/params.hpp"

namespace master::model {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

// Byte layout is documented in docs/checkpoint_format.md.
std::string serialize_checkpoint(const ModelConfig& config, const ModelParams& params);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace master::model
