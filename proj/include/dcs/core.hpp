#pragma once

// System abstraction: participants, configuration, state, and the
// definitional predicates evaluated over them.

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dcs {

using ParticipantId = std::uint32_t;

// Invalid configuration or input values. `key` names the offending field
// (dotted path when it comes from a config document).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Raised when a round is requested with nobody left to vote.
class CompromisedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Duration charged to a round that had no messages to process.
inline constexpr double kZeroLoadDurationS = 0.001;

struct Participant {
  ParticipantId id = 0;
  double power = 1.0;  // messages per second
  bool active = true;
  std::uint32_t timeout_streak = 0;
};

enum class DistributionKind { lognormal, pareto, constant };

// Population power law.
//   lognormal: mu = log-mean, sigma = log-stddev
//   pareto:    mu = scale (minimum), sigma = shape alpha (> 1)
//   constant:  mu = value, sigma ignored
struct PowerDistribution {
  DistributionKind kind = DistributionKind::lognormal;
  double mu = 0.0;
  double sigma = 1.5;
  // Rescale the sample so its median equals the initial demand rate.
  bool calibrate = true;
};

enum class GrowthMode { linear, geometric };

struct UserSchedule {
  std::uint64_t initial_users = 1000;
  GrowthMode growth = GrowthMode::geometric;
  double rate = 1.5;  // factor per epoch (geometric) or users per epoch (linear)
  std::uint32_t epochs = 30;
};

struct SystemConfig {
  double timeout_s = 1.0;
  double threshold = 0.5;
  std::optional<std::uint32_t> dropout_k = 3;  // nullopt: never drop out
  std::uint32_t population_size = 1000;
  PowerDistribution power_distribution{};
  double per_user_rate = 0.1;
  UserSchedule user_schedule{};
  double round_period_s = 1.0;
  double cartel_beta = 0.1;
  std::uint64_t rng_seed = 42;
};

struct SystemState {
  std::vector<Participant> participants;
  std::uint64_t ledger_height = 0;
  std::uint64_t epoch = 0;
};

struct RoundOutcome {
  std::vector<ParticipantId> quorum_ids;  // accumulation order
  std::vector<ParticipantId> timed_out_ids;
  std::uint64_t processed = 0;
  double duration_s = kZeroLoadDurationS;
  bool success = false;
};

inline void validate(const SystemConfig& config) {
  auto positive = [](double v) { return v > 0.0; };
  if (!positive(config.timeout_s)) throw ConfigError("timeout_s", "must be > 0");
  if (!(config.threshold > 0.0 && config.threshold <= 1.0))
    throw ConfigError("threshold", "must lie in (0, 1]");
  if (config.dropout_k && *config.dropout_k == 0)
    throw ConfigError("dropout_k", "must be a positive integer");
  if (config.population_size == 0)
    throw ConfigError("population_size", "must be > 0");
  if (!positive(config.per_user_rate))
    throw ConfigError("per_user_rate", "must be > 0");
  if (!positive(config.round_period_s))
    throw ConfigError("round_period_s", "must be > 0");
  if (!positive(config.cartel_beta))
    throw ConfigError("cartel_beta", "must be > 0");

  const auto& dist = config.power_distribution;
  switch (dist.kind) {
    case DistributionKind::lognormal:
      if (!(dist.sigma >= 0.0))
        throw ConfigError("power_distribution.sigma", "lognormal requires sigma >= 0");
      break;
    case DistributionKind::pareto:
      if (!positive(dist.mu))
        throw ConfigError("power_distribution.mu", "pareto scale must be > 0");
      if (!(dist.sigma > 1.0))
        throw ConfigError("power_distribution.sigma", "pareto shape must be > 1");
      break;
    case DistributionKind::constant:
      if (!positive(dist.mu))
        throw ConfigError("power_distribution.mu", "constant power must be > 0");
      break;
  }

  const auto& sched = config.user_schedule;
  if (sched.initial_users == 0)
    throw ConfigError("user_schedule.initial_users", "must be > 0");
  if (sched.epochs == 0) throw ConfigError("user_schedule.epochs", "must be > 0");
  if (sched.growth == GrowthMode::geometric && !positive(sched.rate))
    throw ConfigError("user_schedule.rate", "geometric rate must be > 0");
  if (sched.growth == GrowthMode::linear && !(sched.rate >= 0.0))
    throw ConfigError("user_schedule.rate", "linear rate must be >= 0");
}

// C(S): number of consensus participants still taking part.
inline std::size_t coordination_cost(const SystemState& state) {
  std::size_t n = 0;
  for (const auto& p : state.participants) n += p.active ? 1 : 0;
  return n;
}

// No single point of control (no active participant holds a threshold share
// on its own) and no single point of failure (removing any one participant
// leaves survivors able to form a quorum among themselves).
inline bool is_decentralized(const SystemState& state, double threshold) {
  if (state.participants.empty())
    throw std::invalid_argument("is_decentralized: undefined for empty scope");

  double total = 0.0;
  std::size_t active = 0;
  for (const auto& p : state.participants) {
    if (!p.active) continue;
    total += p.power;
    ++active;
  }
  // Survivors re-form consensus against their own total, which they always
  // reach as long as at least one of them remains.
  if (active < 2) return false;
  for (const auto& p : state.participants) {
    if (p.active && p.power >= threshold * total) return false;
  }
  return true;
}

// T(S) for one round, in messages per second.
inline double throughput(const RoundOutcome& outcome) {
  if (!outcome.success) return 0.0;
  return static_cast<double>(outcome.processed) / outcome.duration_s;
}

namespace detail {

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace detail

inline std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::lognormal: return "lognormal";
    case DistributionKind::pareto: return "pareto";
    case DistributionKind::constant: return "constant";
  }
  return "?";
}

inline std::string_view to_string(GrowthMode mode) {
  return mode == GrowthMode::linear ? "linear" : "geometric";
}

// Content hash of every config value except the seed.
inline std::string config_digest(const SystemConfig& c) {
  using detail::format_double;
  std::string text;
  auto put = [&](std::string_view key, const std::string& value) {
    text.append(key).append("=").append(value).append(";");
  };
  put("timeout_s", format_double(c.timeout_s));
  put("threshold", format_double(c.threshold));
  put("dropout_k", c.dropout_k ? std::to_string(*c.dropout_k) : "inf");
  put("population_size", std::to_string(c.population_size));
  put("power_distribution.kind", std::string(to_string(c.power_distribution.kind)));
  put("power_distribution.mu", format_double(c.power_distribution.mu));
  put("power_distribution.sigma", format_double(c.power_distribution.sigma));
  put("power_distribution.calibrate", c.power_distribution.calibrate ? "1" : "0");
  put("per_user_rate", format_double(c.per_user_rate));
  put("user_schedule.initial_users", std::to_string(c.user_schedule.initial_users));
  put("user_schedule.growth", std::string(to_string(c.user_schedule.growth)));
  put("user_schedule.rate", format_double(c.user_schedule.rate));
  put("user_schedule.epochs", std::to_string(c.user_schedule.epochs));
  put("round_period_s", format_double(c.round_period_s));
  put("cartel_beta", format_double(c.cartel_beta));
  return detail::hex64(detail::fnv1a(text));
}

}  // namespace dcs
