#include "master/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace master::model {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'S', 'T', 'R', 'C', 'K', 'P'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointError("checkpoint: truncated file");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const ModelConfig& config, const ModelParams& params) {
  params.check_shapes(config);
  Writer w;
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.u32(kCheckpointVersion);
  for (std::size_t v : {config.num_features, config.market_dim, config.hidden, config.lookback,
                        config.intra_heads, config.inter_heads, config.ffn_width()})
    w.u64(v);
  w.f64(config.gate_temperature);
  w.u8(static_cast<std::uint8_t>((config.disable_inter_stock ? 1 : 0) |
                                 (config.disable_gating ? 2 : 0)));
  const auto arrays = params.named();
  w.u32(static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    w.u32(static_cast<std::uint32_t>(a.name.size()));
    w.bytes(a.name);
    const auto& shape = a.tensor.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) w.u64(d);
    for (double v : a.tensor.values()) w.f64(v);
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw CheckpointError("checkpoint: bad magic, not a checkpoint file");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelConfig config;
  config.num_features = r.u64();
  config.market_dim = r.u64();
  config.hidden = r.u64();
  config.lookback = r.u64();
  config.intra_heads = r.u64();
  config.inter_heads = r.u64();
  config.ffn_hidden = r.u64();
  config.gate_temperature = r.f64();
  const auto flags = r.u8();
  if (flags > 3) throw CheckpointError("checkpoint: unknown flag bits");
  config.disable_inter_stock = flags & 1;
  config.disable_gating = flags & 2;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }

  ModelParams params = ModelParams::zeros(config);
  auto arrays = params.named();
  const auto count = r.u32();
  if (count != arrays.size()) {
    throw CheckpointError("checkpoint: expected " + std::to_string(arrays.size()) +
                          " arrays, found " + std::to_string(count));
  }
  for (auto& a : arrays) {
    const auto name = r.bytes(r.u32());
    if (name != a.name) {
      throw CheckpointError("checkpoint: expected array '" + a.name + "', found '" + name + "'");
    }
    nn::Shape shape(r.u32());
    for (auto& d : shape) d = r.u64();
    if (shape != a.tensor.shape()) {
      throw CheckpointError("checkpoint: array " + name + " has shape " + nn::to_string(shape) +
                            ", config implies " + nn::to_string(a.tensor.shape()));
    }
    for (double& v : a.tensor.mutable_values()) v = r.f64();
  }
  if (!r.done()) throw CheckpointError("checkpoint: trailing bytes");
  return {config, params};
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams& params) {
  const auto bytes = serialize_checkpoint(config, params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace master::model
