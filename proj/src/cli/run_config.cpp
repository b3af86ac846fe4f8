#include "master/cli/run_config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

namespace master::cli {

namespace {

using nlohmann::json;

// One JSON object being read; remembers which keys were consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned()) throw ConfigError("expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("expected a string");
      }
      target = it->template get<T>();
    } catch (const std::exception& e) {
      throw ConfigError(where() + "." + key + ": " + e.what());
    }
  }

  void read_optional(const char* key, std::optional<std::size_t>& target) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return;
    if (!it->is_number_unsigned()) {
      throw ConfigError(where() + "." + key + ": expected a non-negative integer or null");
    }
    target = it->get<std::size_t>();
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    if (it == node_.end()) return std::nullopt;
    return Section(*it, where() + "." + key);
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string where() const { return path_; }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown config key " + where() + "." + it.key());
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum>
Enum parse_enum(const std::string& where, const std::string& value,
                std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(where + ": '" + value + "' is not one of " + names);
}

std::string missing_name(data::MissingPolicy p) {
  return p == data::MissingPolicy::reject ? "reject" : "forward_fill";
}

std::string normalization_name(explain::Normalization n) {
  return n == explain::Normalization::global_max ? "global_max" : "row_max";
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const RunConfig& c) {
  const auto& s = c.synthetic;
  json j;
  j["data"] = {{"stocks_csv", c.stocks_csv},
               {"index_csv", c.index_csv},
               {"missing", missing_name(c.missing)},
               {"synthetic",
                {{"seed", s.seed},
                 {"num_stocks", s.num_stocks},
                 {"num_days", s.num_days},
                 {"num_features", s.num_features},
                 {"leader_fraction", s.leader_fraction},
                 {"lag", s.lag},
                 {"signal_strength", s.signal_strength},
                 {"leader_autocorrelation", s.leader_autocorrelation},
                 {"volatility", s.volatility},
                 {"market_volatility", s.market_volatility},
                 {"num_indices", s.num_indices}}}};
  j["windows"] = {{"lookback", c.windows.lookback},
                  {"horizon", c.windows.horizon},
                  {"intervals", c.windows.intervals},
                  {"strict_labels", c.windows.strict_labels}};
  j["split"] = {{"train_fraction", c.train_fraction}, {"valid_fraction", c.valid_fraction}};
  j["model"] = {{"hidden", c.model.hidden},
                {"intra_heads", c.model.intra_heads},
                {"inter_heads", c.model.inter_heads},
                {"gate_temperature", c.model.gate_temperature},
                {"ffn_hidden", c.model.ffn_width()},
                {"disable_inter_stock", c.model.disable_inter_stock},
                {"disable_gating", c.model.disable_gating}};
  j["train"] = {{"lr", c.train.optimizer.lr},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience},
                {"seed", c.train.seed},
                {"beta1", c.train.optimizer.beta1},
                {"beta2", c.train.optimizer.beta2},
                {"eps", c.train.optimizer.eps},
                {"clip_norm", c.train.optimizer.clip_norm}};
  j["evaluation"] = {
      {"top_k", c.backtest.top_k},
      {"trading_days_per_year", c.backtest.trading_days_per_year},
      {"benchmark", c.backtest.benchmark == eval::Benchmark::universe ? "universe" : "index"},
      {"benchmark_index", c.benchmark_index}};
  j["explain"] = {{"date", c.explain.date},
                  {"target", c.explain.target},
                  {"source", c.explain.source},
                  {"normalization", normalization_name(c.explain.normalization)},
                  {"intra_head", optional_json(c.explain.intra_head)},
                  {"inter_head", optional_json(c.explain.inter_head)}};
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (stocks_csv.empty() != index_csv.empty()) {
    throw ConfigError("data.stocks_csv and data.index_csv must be given together");
  }
  if (synthetic.num_stocks < 2) throw ConfigError("data.synthetic.num_stocks must be >= 2");
  if (windows.lookback < 1 || windows.horizon < 1) {
    throw ConfigError("windows.lookback and windows.horizon must be >= 1");
  }
  if (windows.intervals.empty()) throw ConfigError("windows.intervals must not be empty");
  for (auto d : windows.intervals)
    if (d == 0) throw ConfigError("windows.intervals entries must be >= 1");
  if (!(train_fraction > 0.0) || !(valid_fraction > 0.0) || train_fraction + valid_fraction >= 1.0) {
    throw ConfigError("split fractions must be positive and sum to less than 1");
  }
  model::ModelConfig probe = model;
  probe.num_features = 1;
  probe.market_dim = 1;
  probe.lookback = windows.lookback;
  try {
    probe.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (backtest.top_k < 1) throw ConfigError("evaluation.top_k must be >= 1");
  if (!(backtest.trading_days_per_year > 0.0)) {
    throw ConfigError("evaluation.trading_days_per_year must be positive");
  }
  if (backtest.benchmark == eval::Benchmark::index && benchmark_index.empty()) {
    throw ConfigError("evaluation.benchmark = index needs evaluation.benchmark_index");
  }
}

RunConfig parse_run_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "config");
  if (auto data = top.child("data")) {
    data->read("stocks_csv", c.stocks_csv);
    data->read("index_csv", c.index_csv);
    std::string missing = missing_name(c.missing);
    data->read("missing", missing);
    c.missing = parse_enum<data::MissingPolicy>(
        data->where() + ".missing", missing,
        {{"reject", data::MissingPolicy::reject}, {"forward_fill", data::MissingPolicy::forward_fill}});
    if (auto syn = data->child("synthetic")) {
      auto& s = c.synthetic;
      syn->read("seed", s.seed);
      syn->read("num_stocks", s.num_stocks);
      syn->read("num_days", s.num_days);
      syn->read("num_features", s.num_features);
      syn->read("leader_fraction", s.leader_fraction);
      syn->read("lag", s.lag);
      syn->read("signal_strength", s.signal_strength);
      syn->read("leader_autocorrelation", s.leader_autocorrelation);
      syn->read("volatility", s.volatility);
      syn->read("market_volatility", s.market_volatility);
      syn->read("num_indices", s.num_indices);
      syn->finish();
    }
    data->finish();
  }
  if (auto w = top.child("windows")) {
    w->read("lookback", c.windows.lookback);
    w->read("horizon", c.windows.horizon);
    if (const json* iv = w->raw("intervals")) {
      if (!iv->is_array()) throw ConfigError(w->where() + ".intervals: expected an array");
      c.windows.intervals.clear();
      for (const auto& v : *iv) {
        if (!v.is_number_unsigned()) {
          throw ConfigError(w->where() + ".intervals: entries must be positive integers");
        }
        c.windows.intervals.push_back(v.get<std::size_t>());
      }
    }
    w->read("strict_labels", c.windows.strict_labels);
    w->finish();
  }
  if (auto s = top.child("split")) {
    s->read("train_fraction", c.train_fraction);
    s->read("valid_fraction", c.valid_fraction);
    s->finish();
  }
  if (auto m = top.child("model")) {
    m->read("hidden", c.model.hidden);
    m->read("intra_heads", c.model.intra_heads);
    m->read("inter_heads", c.model.inter_heads);
    m->read("gate_temperature", c.model.gate_temperature);
    m->read("ffn_hidden", c.model.ffn_hidden);
    m->read("disable_inter_stock", c.model.disable_inter_stock);
    m->read("disable_gating", c.model.disable_gating);
    m->finish();
  }
  if (auto t = top.child("train")) {
    t->read("lr", c.train.optimizer.lr);
    t->read("max_epochs", c.train.max_epochs);
    t->read("patience", c.train.patience);
    t->read("seed", c.train.seed);
    t->read("beta1", c.train.optimizer.beta1);
    t->read("beta2", c.train.optimizer.beta2);
    t->read("eps", c.train.optimizer.eps);
    t->read("clip_norm", c.train.optimizer.clip_norm);
    t->finish();
  }
  if (auto e = top.child("evaluation")) {
    e->read("top_k", c.backtest.top_k);
    e->read("trading_days_per_year", c.backtest.trading_days_per_year);
    std::string bench = "universe";
    e->read("benchmark", bench);
    c.backtest.benchmark = parse_enum<eval::Benchmark>(
        e->where() + ".benchmark", bench,
        {{"universe", eval::Benchmark::universe}, {"index", eval::Benchmark::index}});
    e->read("benchmark_index", c.benchmark_index);
    e->finish();
  }
  if (auto x = top.child("explain")) {
    x->read("date", c.explain.date);
    x->read("target", c.explain.target);
    x->read("source", c.explain.source);
    std::string norm = normalization_name(c.explain.normalization);
    x->read("normalization", norm);
    c.explain.normalization = parse_enum<explain::Normalization>(
        x->where() + ".normalization", norm,
        {{"global_max", explain::Normalization::global_max},
         {"row_max", explain::Normalization::row_max}});
    x->read_optional("intra_head", c.explain.intra_head);
    x->read_optional("inter_head", c.explain.inter_head);
    x->finish();
  }
  top.finish();
  c.model.lookback = c.windows.lookback;
  c.backtest.horizon = c.windows.horizon;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_run_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

}  // namespace master::cli
