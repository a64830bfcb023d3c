#pragma once

// Wrappers around the base engine for the two ways of relaxing full
// consensus: settling most traffic in an off-consensus channel layer, and
// splitting participants into independently voting shards.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dcs/core.hpp"
#include "dcs/population.hpp"
#include "dcs/rng.hpp"
#include "dcs/scenario.hpp"

namespace dcs {

struct ChannelConfig {
  double batch_factor = 1.0;  // off-consensus messages per settlement message
  double ds_capacity = 1e15;  // msgs/s the channel layer can absorb
};

enum class ShardAssignment { balanced, random };

struct ShardConfig {
  std::uint32_t group_count = 1;
  double cross_shard_fraction = 0.0;
  double proof_overhead = 0.0;  // extra cost per cross-shard message (log proofs)
  ShardAssignment assignment = ShardAssignment::balanced;
};

inline void validate(const ChannelConfig& ch) {
  if (!(ch.batch_factor >= 1.0)) throw ConfigError("channels.batch_factor", "must be >= 1");
  if (!(ch.ds_capacity > 0.0)) throw ConfigError("channels.ds_capacity", "must be > 0");
}

inline void validate(const ShardConfig& sh) {
  if (sh.group_count == 0) throw ConfigError("sharding.group_count", "must be >= 1");
  if (!(sh.cross_shard_fraction >= 0.0 && sh.cross_shard_fraction <= 1.0))
    throw ConfigError("sharding.cross_shard_fraction", "must lie in [0, 1]");
  if (!(sh.proof_overhead >= 0.0))
    throw ConfigError("sharding.proof_overhead", "must be >= 0");
}

// Base scenario with only 1/batch_factor of the demand reaching consensus.
inline ScenarioResult simulate_channels(const SystemConfig& config, const ChannelConfig& ch) {
  validate(config);
  validate(ch);
  auto layout = detail::single_group(config.population_size);
  layout.batch_factor = ch.batch_factor;
  layout.offchain_capacity = ch.ds_capacity;
  return detail::simulate(config, initial_powers(config), layout);
}

// Group membership for sharded consensus. Balanced assignment deals
// participants round-robin in descending power order (ties by id).
inline std::vector<std::vector<ParticipantId>> assign_shards(const std::vector<double>& powers,
                                                             const ShardConfig& sh,
                                                             std::uint64_t seed) {
  std::vector<ParticipantId> order(powers.size());
  std::iota(order.begin(), order.end(), ParticipantId{0});
  if (sh.assignment == ShardAssignment::balanced) {
    std::stable_sort(order.begin(), order.end(), [&](ParticipantId a, ParticipantId b) {
      return powers[a] > powers[b];
    });
  } else {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::vector<ParticipantId>> groups(sh.group_count);
  for (std::size_t i = 0; i < order.size(); ++i) groups[i % sh.group_count].push_back(order[i]);
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

// Each shard votes on its own slice of demand, inflated by the cost of
// verifying cross-shard messages. Aggregates: throughput is summed,
// min_cartel_size is the weakest shard's, decentralized requires every shard.
inline ScenarioResult simulate_sharding(const SystemConfig& config, const ShardConfig& sh) {
  validate(config);
  validate(sh);
  if (sh.group_count > config.population_size)
    throw ConfigError("sharding.group_count", "exceeds population_size");

  auto powers = initial_powers(config);
  detail::Layout layout;
  layout.groups = assign_shards(powers, sh, config.rng_seed);
  layout.load_overhead = 1.0 + sh.cross_shard_fraction * sh.proof_overhead;
  return detail::simulate(config, std::move(powers), layout);
}

}  // namespace dcs
