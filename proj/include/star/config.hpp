#pragma once

// Flat key-value configuration:
//
//   # comment
//   [train]            -> subsequent keys are prefixed with "train."
//   lr = 0.1
//   reg.lambda = 0.05  -> dotted keys are allowed anywhere
//   name = "quoted"    -> surrounding quotes are stripped
//
// Keys keep their file order. Every lookup marks the key as used so callers
// can reject typos via `unused_keys()`.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "common.hpp"
#include "regularization.hpp"
#include "training.hpp"

namespace star {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>") {
    KeyValueConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos && !inside_quotes(line, hash)) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(source, line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError(source, line_no, "empty key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      if (!section.empty()) key = section + "." + key;
      if (cfg.index_.count(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
      cfg.index_[key] = cfg.entries_.size();
      cfg.entries_.emplace_back(key, value);
    }
    return cfg;
  }

  static KeyValueConfig parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  bool has(const std::string& key) const { return index_.count(key) > 0; }

  std::optional<std::string> raw(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    used_.insert(key);
    return entries_[it->second].second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
  }

  std::string require_string(const std::string& key) const {
    auto v = raw(key);
    if (!v) throw ConfigError(key + ": required key is missing");
    return *v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + *v + "'");
    }
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size())
      throw ConfigError(key + ": expected a non-negative integer, got '" + *v + "'");
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + *v + "'");
  }

  // Entries whose key starts with `prefix`, in file order.
  std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : entries_)
      if (k.rfind(prefix, 0) == 0) out.emplace_back(k, v);
    return out;
  }

  void mark_used(const std::string& key) const { used_.insert(key); }

  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void reject_unused() const {
    auto unused = unused_keys();
    if (!unused.empty()) throw ConfigError(unused.front() + ": unknown configuration key");
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static bool inside_quotes(const std::string& s, std::size_t pos) {
    return std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(pos), '"') % 2 == 1;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
  mutable std::set<std::string> used_;
};

// Hyperparameter presets for the standard benchmarks (batch size, w0, and
// the DURA / Fro weights).
inline void apply_dataset_preset(const std::string& name, TrainConfig& cfg) {
  if (name == "wn18rr") {
    cfg.batch_size = 100;
    cfg.w0 = 0.1;
    cfg.reg.lambda = cfg.reg.kind == RegKind::Fro ? 0.001 : 0.1;
  } else if (name == "fb15k237") {
    cfg.batch_size = 100;
    cfg.w0 = 0.0;
    cfg.reg.lambda = cfg.reg.kind == RegKind::Fro ? 0.001 : 0.05;
  } else if (name == "yago3-10") {
    cfg.batch_size = 1000;
    cfg.w0 = 0.0;
    cfg.reg.lambda = cfg.reg.kind == RegKind::Fro ? 0.001 : 0.005;
  } else {
    throw ConfigError("train.preset: unknown dataset preset '" + name + "' (expected wn18rr|fb15k237|yago3-10)");
  }
}

// Reads model.*, train.*, reg.* and eval.* keys. Explicit keys override a
// `train.preset`.
inline TrainConfig train_config_from(const KeyValueConfig& kv) {
  TrainConfig cfg;
  cfg.model_kind = parse_model_kind(kv.get_string("model.kind", "STaR"));
  cfg.dim = kv.get_uint("model.dim", cfg.dim);
  cfg.init_scale = kv.get_double("model.init_scale", cfg.init_scale);
  cfg.reg.kind = parse_reg_kind(kv.get_string("reg.kind", "none"));
  cfg.reg.dura_variant = parse_dura_variant(kv.get_string("reg.dura_variant", "literal"));
  if (auto preset = kv.raw("train.preset")) apply_dataset_preset(*preset, cfg);
  cfg.reg.lambda = kv.get_double("reg.lambda", cfg.reg.lambda);
  cfg.lr = kv.get_double("train.lr", cfg.lr);
  cfg.batch_size = kv.get_uint("train.batch_size", cfg.batch_size);
  cfg.epochs = kv.get_uint("train.epochs", cfg.epochs);
  cfg.w0 = kv.get_double("train.w0", cfg.w0);
  cfg.seed = kv.get_uint("train.seed", cfg.seed);
  cfg.optimizer = parse_optimizer(kv.get_string("train.optimizer", "adagrad"));
  cfg.adagrad_epsilon = kv.get_double("train.adagrad_epsilon", cfg.adagrad_epsilon);
  cfg.eval_every = kv.get_uint("train.eval_every", cfg.eval_every);
  cfg.threads = kv.get_uint("train.threads", cfg.threads);
  cfg.tie_rule = parse_tie_rule(kv.get_string("eval.tie_rule", "pessimistic"));
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"model.kind", to_string(c.model_kind)},
          {"model.dim", c.dim},
          {"model.init_scale", c.init_scale},
          {"train.lr", c.lr},
          {"train.batch_size", c.batch_size},
          {"train.epochs", c.epochs},
          {"train.w0", c.w0},
          {"train.seed", c.seed},
          {"train.optimizer", to_string(c.optimizer)},
          {"train.adagrad_epsilon", c.adagrad_epsilon},
          {"train.eval_every", c.eval_every},
          {"train.threads", c.threads},
          {"reg.kind", to_string(c.reg.kind)},
          {"reg.lambda", c.reg.lambda},
          {"reg.dura_variant", to_string(c.reg.dura_variant)},
          {"eval.tie_rule", to_string(c.tie_rule)}};
}

inline std::uint64_t config_hash(const TrainConfig& c) { return fnv1a(to_json(c).dump()); }

}  // namespace star
