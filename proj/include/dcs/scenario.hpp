#pragma once

// Epoch loop: grow the user base, run one round per consensus group, drop
// participants that keep timing out, and record the resulting metrics.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "dcs/consensus.hpp"
#include "dcs/core.hpp"
#include "dcs/metrics.hpp"
#include "dcs/population.hpp"
#include "dcs/rng.hpp"

namespace dcs {

namespace detail {

// How the population is split into consensus groups and how demand maps onto
// each group's voting load.
struct Layout {
  std::vector<std::vector<ParticipantId>> groups;
  double batch_factor = 1.0;   // messages per settlement put to a vote
  double load_overhead = 1.0;  // per-group processing multiplier
  double offchain_capacity = std::numeric_limits<double>::infinity();
};

inline Layout single_group(std::size_t n) {
  Layout layout;
  layout.groups.emplace_back(n);
  std::iota(layout.groups[0].begin(), layout.groups[0].end(), ParticipantId{0});
  return layout;
}

inline SystemState make_group(const std::vector<ParticipantId>& ids,
                              const std::vector<double>& powers) {
  SystemState state;
  state.participants.reserve(ids.size());
  for (ParticipantId id : ids) state.participants.push_back({id, powers[id], true, 0});
  return state;
}

inline ScenarioResult simulate(const SystemConfig& config, std::vector<double> powers,
                               const Layout& layout) {
  ScenarioResult result;
  result.seed = config.rng_seed;
  result.config_digest = config_digest(config);
  result.rng_id = kRngId;

  std::vector<SystemState> groups;
  for (const auto& ids : layout.groups) groups.push_back(make_group(ids, powers));

  // The population is fixed at epoch 0 and everyone starts active, so the
  // historical participant set is the whole population.
  const double historical_avg =
      std::accumulate(powers.begin(), powers.end(), 0.0) / static_cast<double>(powers.size());
  const DemandModel model{config.per_user_rate};
  const double group_count = static_cast<double>(groups.size());

  for (std::uint32_t e = 0; e < config.user_schedule.epochs; ++e) {
    EpochRecord rec;
    rec.epoch = e;
    rec.users = users_at(config.user_schedule, e);
    rec.demand_rate = demand(rec.users, model);
    rec.avg_power_historical = historical_avg;

    const double settled = rec.demand_rate / layout.batch_factor;
    const double group_rate = settled / group_count * layout.load_overhead;
    rec.group_rate = group_rate;
    rec.consensus_rate = group_rate * group_count;
    rec.offchain_rate = rec.demand_rate - settled;
    rec.offchain_saturated = rec.offchain_rate > layout.offchain_capacity;
    const auto load =
        static_cast<std::uint64_t>(std::llround(group_rate * config.round_period_s));

    bool all_success = true;
    for (auto& group : groups) {
      group.epoch = e;
      const RoundOutcome outcome = run_round(group, load, config);
      rec.throughput_rate += throughput(outcome);
      all_success = all_success && outcome.success;
      apply_dropout(group, config.dropout_k);
    }
    rec.round_success = all_success;

    bool emptied = false;
    bool decentralized = all_success;
    std::size_t min_cartel = SIZE_MAX;
    std::vector<double> all_active;
    for (const auto& group : groups) {
      const auto active = active_powers(group);
      all_active.insert(all_active.end(), active.begin(), active.end());
      if (active.empty()) {
        emptied = true;
        decentralized = false;
        min_cartel = 0;
        continue;
      }
      min_cartel = std::min(min_cartel, min_cartel_size(active, config.threshold));
      decentralized = decentralized && is_decentralized(group, config.threshold);
    }
    rec.active_participants = all_active.size();
    rec.min_cartel_size = min_cartel;
    // An emptied group has no one left to capture: treat it as already taken.
    rec.cartel_prob = min_cartel == 0 ? 1.0 : cartel_probability(min_cartel, config.cartel_beta);
    rec.gini = all_active.empty() ? 0.0 : gini(all_active);
    rec.decentralized = decentralized;
    result.records.push_back(rec);

    if (emptied) {
      result.compromised_at_epoch = e;
      break;
    }
  }
  result.initial_powers = std::move(powers);
  return result;
}

}  // namespace detail

// Base full-consensus scenario: one group, every participant charged the
// entire load each round.
inline ScenarioResult run_scenario(const SystemConfig& config) {
  validate(config);
  return detail::simulate(config, initial_powers(config),
                          detail::single_group(config.population_size));
}

}  // namespace dcs
