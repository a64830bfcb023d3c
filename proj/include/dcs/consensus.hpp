#pragma once

// Round dynamics under full consensus: every active participant processes
// the whole load, the fastest responders assemble the quorum, and anyone who
// cannot finish within the timeout is left out.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcs/core.hpp"

namespace dcs {

// One voting round over `load` messages. Updates timeout streaks and the
// ledger height in `state`; dropout is applied separately.
inline RoundOutcome run_round(SystemState& state, std::uint64_t load,
                              const SystemConfig& config) {
  struct Response {
    double time;
    ParticipantId id;
    double power;
  };

  if (coordination_cost(state) == 0)
    throw CompromisedError("system compromised: empty consensus set");

  double total = 0.0;
  std::vector<Response> responders;
  RoundOutcome outcome;
  const double messages = static_cast<double>(load);

  for (auto& p : state.participants) {
    if (!p.active) continue;
    total += p.power;
    const double time = messages / p.power;
    if (time > config.timeout_s) {
      ++p.timeout_streak;
      outcome.timed_out_ids.push_back(p.id);
    } else {
      p.timeout_streak = 0;
      responders.push_back({time, p.id, p.power});
    }
  }
  std::sort(responders.begin(), responders.end(), [](const Response& a, const Response& b) {
    return a.time != b.time ? a.time < b.time : a.id < b.id;
  });

  const double needed = config.threshold * total;
  double weight = 0.0;
  for (const auto& r : responders) {
    outcome.quorum_ids.push_back(r.id);
    weight += r.power;
    if (weight >= needed) {
      outcome.success = true;
      outcome.duration_s = load == 0 ? kZeroLoadDurationS : r.time;
      break;
    }
  }

  if (!outcome.success) {
    outcome.quorum_ids.clear();
    outcome.duration_s = config.timeout_s;
    return outcome;
  }
  outcome.processed = load;
  state.ledger_height += load;
  return outcome;
}

// Permanently excludes participants whose timeout streak reached `k`.
// Returns the number excluded.
inline std::size_t apply_dropout(SystemState& state, std::optional<std::uint32_t> k) {
  if (!k) return 0;
  std::size_t dropped = 0;
  for (auto& p : state.participants) {
    if (p.active && p.timeout_streak >= *k) {
      p.active = false;
      ++dropped;
    }
  }
  return dropped;
}

// Smallest number of participants whose combined power reaches
// `threshold` of the total: the k largest powers, accumulated greedily.
inline std::size_t min_quorum_size(std::span<const double> powers, double threshold) {
  if (powers.empty()) throw std::invalid_argument("min_quorum_size: empty population");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("min_quorum_size: threshold must lie in (0, 1]");

  std::vector<double> sorted(powers.begin(), powers.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>{});
  double total = 0.0;
  for (double p : sorted) total += p;

  const double needed = threshold * total;
  double weight = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    weight += sorted[k];
    if (weight >= needed) return k + 1;
  }
  // Rounding can leave the full sum a hair short of threshold * total at 1.0.
  return sorted.size();
}

inline std::vector<double> active_powers(const SystemState& state) {
  std::vector<double> out;
  for (const auto& p : state.participants)
    if (p.active) out.push_back(p.power);
  return out;
}

}  // namespace dcs
