#pragma once

// Participant power draws and user demand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcs/core.hpp"
#include "dcs/rng.hpp"

namespace dcs {

struct DemandModel {
  double per_user_rate = 0.1;  // messages/second/user
};

inline void validate(const PowerDistribution& dist) {
  SystemConfig probe;
  probe.power_distribution = dist;
  validate(probe);
}

// n independent draws; a pure function of (n, dist, seed).
inline std::vector<double> sample_powers(std::size_t n, const PowerDistribution& dist,
                                         std::uint64_t seed) {
  validate(dist);
  std::vector<double> out;
  out.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    switch (dist.kind) {
      case DistributionKind::lognormal:
        out.push_back(std::exp(dist.mu + dist.sigma * rng.normal()));
        break;
      case DistributionKind::pareto:
        // inverse CDF: x_m * u^(-1/alpha), u in (0, 1]
        out.push_back(dist.mu * std::pow(rng.uniform_open0(), -1.0 / dist.sigma));
        break;
      case DistributionKind::constant:
        out.push_back(dist.mu);
        break;
    }
  }
  return out;
}

inline double demand(std::uint64_t users, const DemandModel& model) {
  return static_cast<double>(users) * model.per_user_rate;
}

// Share of the population whose power falls below the total system demand.
inline double capacity_shortfall(std::uint64_t users, const DemandModel& model,
                                 std::span<const double> powers) {
  if (powers.empty())
    throw std::invalid_argument("capacity_shortfall: empty population");
  const double load = demand(users, model);
  const auto behind = std::count_if(powers.begin(), powers.end(),
                                    [load](double p) { return p < load; });
  return static_cast<double>(behind) / static_cast<double>(powers.size());
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

inline std::uint64_t users_at(const UserSchedule& sched, std::uint32_t epoch) {
  const double initial = static_cast<double>(sched.initial_users);
  const double e = static_cast<double>(epoch);
  const double users = sched.growth == GrowthMode::geometric
                           ? initial * std::pow(sched.rate, e)
                           : initial + sched.rate * e;
  return static_cast<std::uint64_t>(std::llround(users));
}

// Initial population for a scenario, rescaled (when requested) so that the
// median participant exactly keeps pace with epoch-0 demand.
inline std::vector<double> initial_powers(const SystemConfig& config) {
  auto powers = sample_powers(config.population_size, config.power_distribution,
                              config.rng_seed);
  if (config.power_distribution.calibrate) {
    const double target =
        demand(config.user_schedule.initial_users, DemandModel{config.per_user_rate});
    const double scale = target / median(powers);
    for (double& p : powers) p *= scale;
  }
  return powers;
}

}  // namespace dcs
