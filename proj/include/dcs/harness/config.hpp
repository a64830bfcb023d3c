#pragma once

// JSON configuration documents: defaults, strict validation, canonical form
// and content digest.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dcs/core.hpp"
#include "dcs/metrics.hpp"
#include "dcs/mitigations.hpp"

namespace dcs::harness {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { base, channels, sharding };

inline std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::base: return "base";
    case ScenarioKind::channels: return "channels";
    case ScenarioKind::sharding: return "sharding";
  }
  return "?";
}

struct HarnessConfig {
  SystemConfig system;
  ScenarioKind scenario = ScenarioKind::base;
  ChannelConfig channels;
  ShardConfig sharding;
  LemmaCriteria criteria;
};

namespace detail {

inline std::string join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
}

// Typed field readers over one JSON object; every key read is remembered so
// leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(prefix_, "expected an object");
  }

  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(std::string_view key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(join(prefix_, key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(join(prefix_, key), "must be finite");
    }
  }

  template <typename Int>
  void integer(std::string_view key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer())
        throw ConfigError(join(prefix_, key), "expected an integer");
      if (v->is_number_unsigned()) {
        const auto u = v->get<std::uint64_t>();
        if (u > std::numeric_limits<Int>::max())
          throw ConfigError(join(prefix_, key), "out of range");
        out = static_cast<Int>(u);
      } else {
        const auto s = v->get<std::int64_t>();
        if (s < 0) throw ConfigError(join(prefix_, key), "must be non-negative");
        out = static_cast<Int>(s);
      }
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(join(prefix_, key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <typename Enum>
  void choice(std::string_view key, Enum& out,
              std::initializer_list<std::pair<std::string_view, Enum>> options) {
    if (const json* v = find(key)) {
      if (v->is_string()) {
        const auto text = v->get<std::string>();
        for (const auto& [name, value] : options) {
          if (text == name) {
            out = value;
            return;
          }
        }
      }
      std::string names;
      for (const auto& [name, value] : options) names += (names.empty() ? "" : "|") + std::string(name);
      throw ConfigError(join(prefix_, key), "expected one of " + names);
    }
  }

  Fields object(std::string_view key) {
    static const json empty = json::object();
    const json* v = find(key);
    return Fields(v ? *v : empty, join(prefix_, key));
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(join(prefix_, key), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace detail

// Builds a fully defaulted config from a JSON document. Unknown keys and
// constraint violations raise ConfigError naming the key path.
inline HarnessConfig config_from_json(const json& doc) {
  HarnessConfig cfg;
  auto& sys = cfg.system;
  detail::Fields root(doc, "");

  root.integer("population_size", sys.population_size);
  root.number("timeout_s", sys.timeout_s);
  root.number("threshold", sys.threshold);
  if (const json* k = root.find("dropout_k")) {
    if (k->is_null() || (k->is_string() && k->get<std::string>() == "inf")) {
      sys.dropout_k.reset();
    } else if (k->is_number_integer() && k->get<std::int64_t>() > 0 &&
               k->get<std::int64_t>() <= UINT32_MAX) {
      sys.dropout_k = static_cast<std::uint32_t>(k->get<std::int64_t>());
    } else {
      throw ConfigError("dropout_k", "expected a positive integer or \"inf\"");
    }
  }
  root.number("round_period_s", sys.round_period_s);
  root.number("per_user_rate", sys.per_user_rate);
  root.number("cartel_beta", sys.cartel_beta);
  root.integer("rng_seed", sys.rng_seed);

  {
    auto dist = root.object("power_distribution");
    auto& d = sys.power_distribution;
    dist.choice("kind", d.kind,
                {{"lognormal", DistributionKind::lognormal},
                 {"pareto", DistributionKind::pareto},
                 {"constant", DistributionKind::constant}});
    dist.number("mu", d.mu);
    dist.number("sigma", d.sigma);
    dist.boolean("calibrate", d.calibrate);
    dist.reject_unknown();
  }
  {
    auto sched = root.object("user_schedule");
    auto& s = sys.user_schedule;
    sched.integer("initial_users", s.initial_users);
    sched.choice("growth", s.growth,
                 {{"linear", GrowthMode::linear}, {"geometric", GrowthMode::geometric}});
    sched.number("rate", s.rate);
    sched.integer("epochs", s.epochs);
    sched.reject_unknown();
  }
  root.choice("scenario", cfg.scenario,
              {{"base", ScenarioKind::base},
               {"channels", ScenarioKind::channels},
               {"sharding", ScenarioKind::sharding}});
  {
    auto ch = root.object("channels");
    ch.number("batch_factor", cfg.channels.batch_factor);
    ch.number("ds_capacity", cfg.channels.ds_capacity);
    ch.reject_unknown();
  }
  {
    auto sh = root.object("sharding");
    sh.integer("group_count", cfg.sharding.group_count);
    sh.number("cross_shard_fraction", cfg.sharding.cross_shard_fraction);
    sh.number("proof_overhead", cfg.sharding.proof_overhead);
    sh.choice("assignment", cfg.sharding.assignment,
              {{"balanced", ShardAssignment::balanced}, {"random", ShardAssignment::random}});
    sh.reject_unknown();
  }
  {
    auto v = root.object("verify");
    v.number("min_abs_rho", cfg.criteria.min_abs_rho);
    v.number("cartel_prob_level", cfg.criteria.cartel_prob_level);
    v.reject_unknown();
  }
  root.reject_unknown();

  validate(sys);
  validate(cfg.channels);
  validate(cfg.sharding);
  if (cfg.sharding.group_count > sys.population_size)
    throw ConfigError("sharding.group_count", "exceeds population_size");
  if (!(cfg.criteria.min_abs_rho > 0.0 && cfg.criteria.min_abs_rho <= 1.0))
    throw ConfigError("verify.min_abs_rho", "must lie in (0, 1]");
  if (!(cfg.criteria.cartel_prob_level > 0.0 && cfg.criteria.cartel_prob_level <= 1.0))
    throw ConfigError("verify.cartel_prob_level", "must lie in (0, 1]");
  return cfg;
}

// Canonical document with every field spelled out.
inline json config_to_json(const HarnessConfig& cfg) {
  const auto& sys = cfg.system;
  json doc;
  doc["population_size"] = sys.population_size;
  doc["timeout_s"] = sys.timeout_s;
  doc["threshold"] = sys.threshold;
  doc["dropout_k"] = sys.dropout_k ? json(*sys.dropout_k) : json("inf");
  doc["round_period_s"] = sys.round_period_s;
  doc["per_user_rate"] = sys.per_user_rate;
  doc["cartel_beta"] = sys.cartel_beta;
  doc["rng_seed"] = sys.rng_seed;
  doc["power_distribution"] = {{"kind", std::string(to_string(sys.power_distribution.kind))},
                               {"mu", sys.power_distribution.mu},
                               {"sigma", sys.power_distribution.sigma},
                               {"calibrate", sys.power_distribution.calibrate}};
  doc["user_schedule"] = {{"initial_users", sys.user_schedule.initial_users},
                          {"growth", std::string(to_string(sys.user_schedule.growth))},
                          {"rate", sys.user_schedule.rate},
                          {"epochs", sys.user_schedule.epochs}};
  doc["scenario"] = std::string(to_string(cfg.scenario));
  doc["channels"] = {{"batch_factor", cfg.channels.batch_factor},
                     {"ds_capacity", cfg.channels.ds_capacity}};
  doc["sharding"] = {
      {"group_count", cfg.sharding.group_count},
      {"cross_shard_fraction", cfg.sharding.cross_shard_fraction},
      {"proof_overhead", cfg.sharding.proof_overhead},
      {"assignment", cfg.sharding.assignment == ShardAssignment::balanced ? "balanced" : "random"}};
  doc["verify"] = {{"min_abs_rho", cfg.criteria.min_abs_rho},
                   {"cartel_prob_level", cfg.criteria.cartel_prob_level}};
  return doc;
}

// Content hash of the canonical document, seed excluded: seeds are listed
// separately in a run manifest.
inline std::string manifest_digest(const HarnessConfig& cfg) {
  json doc = config_to_json(cfg);
  doc.erase("rng_seed");
  return dcs::detail::hex64(dcs::detail::fnv1a(doc.dump()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline HarnessConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": parse error: " + e.what());
  }
  return config_from_json(doc);
}

// Sets a dotted key path in a config document to a numeric value. A few
// shorthand names are accepted for common sweep axes.
inline json with_param(json doc, std::string_view param, double value) {
  std::string path(param);
  if (path == "user_growth") path = "user_schedule.rate";
  if (path == "batch_factor") path = "channels.batch_factor";
  if (path == "group_count") path = "sharding.group_count";

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key))
      throw ConfigError(path, "no such config key");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_string() && path != "dropout_k") throw ConfigError(path, "not a numeric config key");
  if (node->is_number_integer() || node->is_string()) {
    if (value != std::floor(value) || value < 0.0)
      throw ConfigError(path, "expected a non-negative integer sweep value");
    *node = static_cast<std::uint64_t>(value);
  } else if (node->is_number()) {
    *node = value;
  } else {
    throw ConfigError(path, "not a numeric config key");
  }
  return doc;
}

}  // namespace dcs::harness
