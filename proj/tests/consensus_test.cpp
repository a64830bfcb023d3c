#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dcs/consensus.hpp"
#include "dcs/population.hpp"
#include "dcs/rng.hpp"
#include "dcs/scenario.hpp"
#include "oracles.hpp"

namespace dcs {
namespace {

SystemState state_of(const std::vector<double>& powers) {
  SystemState s;
  for (std::size_t i = 0; i < powers.size(); ++i)
    s.participants.push_back({static_cast<ParticipantId>(i), powers[i], true, 0});
  return s;
}

SystemConfig round_config(double timeout, double threshold) {
  SystemConfig c;
  c.timeout_s = timeout;
  c.threshold = threshold;
  return c;
}

TEST(RunRound, FastestParticipantFormsQuorumAlone) {
  // times 1.0, 2.0, 10.0; 10/16 = 0.625 >= 0.6 after the first member
  auto s = state_of({10, 5, 1});
  const auto out = run_round(s, 10, round_config(2.0, 0.6));
  EXPECT_TRUE(out.success);
  EXPECT_EQ(out.quorum_ids, (std::vector<ParticipantId>{0}));
  EXPECT_EQ(out.timed_out_ids, (std::vector<ParticipantId>{2}));
  EXPECT_EQ(out.processed, 10u);
  EXPECT_DOUBLE_EQ(out.duration_s, 1.0);
  EXPECT_EQ(s.ledger_height, 10u);
  EXPECT_EQ(s.participants[2].timeout_streak, 1u);
  EXPECT_EQ(s.participants[0].timeout_streak, 0u);
}

TEST(RunRound, ZeroLoadUsesDurationFloor) {
  auto s = state_of({3, 1, 2, 4});
  const auto out = run_round(s, 0, round_config(1.0, 0.5));
  EXPECT_TRUE(out.success);
  // all times tie at zero, so accumulation runs in id order: 3 + 1 + 2 >= 5
  EXPECT_EQ(out.quorum_ids, (std::vector<ParticipantId>{0, 1, 2}));
  EXPECT_TRUE(out.timed_out_ids.empty());
  EXPECT_EQ(out.processed, 0u);
  EXPECT_EQ(out.duration_s, kZeroLoadDurationS);
  EXPECT_EQ(throughput(out), 0.0);
}

TEST(RunRound, EveryoneTimesOut) {
  auto s = state_of({1, 1});
  s.ledger_height = 7;
  const auto out = run_round(s, 10, round_config(1.0, 0.5));
  EXPECT_FALSE(out.success);
  EXPECT_TRUE(out.quorum_ids.empty());
  EXPECT_EQ(out.timed_out_ids, (std::vector<ParticipantId>{0, 1}));
  EXPECT_EQ(out.processed, 0u);
  EXPECT_EQ(out.duration_s, 1.0);
  EXPECT_EQ(s.ledger_height, 7u);
  EXPECT_EQ(throughput(out), 0.0);
}

TEST(RunRound, InsufficientTimelyWeightFails) {
  // times 0.9, 1.2, 1.2, 1.2, 1.2: only the 2.0 participant answers, and
  // 2 < 0.5 * 8
  auto s = state_of({2.0, 1.5, 1.5, 1.5, 1.5});
  const auto out = run_round(s, 2, round_config(1.0, 0.5));
  EXPECT_FALSE(out.success);
  EXPECT_TRUE(out.quorum_ids.empty());
  EXPECT_EQ(out.timed_out_ids, (std::vector<ParticipantId>{1, 2, 3, 4}));
  EXPECT_EQ(out.duration_s, 1.0);
  EXPECT_EQ(s.participants[0].timeout_streak, 0u);
}

TEST(RunRound, EmptyConsensusSetIsCompromised) {
  SystemState empty;
  EXPECT_THROW(run_round(empty, 1, SystemConfig{}), CompromisedError);
  auto s = state_of({1, 2});
  for (auto& p : s.participants) p.active = false;
  EXPECT_THROW(run_round(s, 1, SystemConfig{}), CompromisedError);
}

TEST(RunRound, InactiveParticipantsAreIgnored) {
  auto s = state_of({100, 1, 1});
  s.participants[0].active = false;
  const auto out = run_round(s, 1, round_config(2.0, 0.5));
  EXPECT_TRUE(out.success);
  EXPECT_EQ(out.quorum_ids, (std::vector<ParticipantId>{1}));
  EXPECT_EQ(s.participants[0].timeout_streak, 0u);
}

TEST(RunRound, StreaksCountConsecutiveTimeouts) {
  auto s = state_of({10, 1});
  const auto cfg = round_config(1.0, 0.5);
  run_round(s, 5, cfg);
  run_round(s, 5, cfg);
  EXPECT_EQ(s.participants[1].timeout_streak, 2u);
  run_round(s, 1, cfg);  // the weak participant answers in time again
  EXPECT_EQ(s.participants[1].timeout_streak, 0u);
  EXPECT_EQ(s.ledger_height, 11u);
}

TEST(RunRound, MatchesReferenceOnRandomRounds) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> powers;
    std::map<std::uint32_t, double> voters;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid so that timing ties actually occur
      powers.push_back(0.5 * static_cast<double>(1 + rng.below(8)));
      voters[static_cast<std::uint32_t>(i)] = powers.back();
    }
    const auto cfg = round_config(0.5 + 4.0 * rng.uniform(), 0.05 + 0.95 * rng.uniform());
    const std::uint64_t load = rng.below(12);
    auto s = state_of(powers);
    const auto got = run_round(s, load, cfg);
    const auto want = oracle::reference_round(voters, load, cfg.timeout_s, cfg.threshold);
    ASSERT_EQ(got.success, want.success);
    EXPECT_EQ(got.quorum_ids, want.quorum);
    EXPECT_EQ(std::set<ParticipantId>(got.timed_out_ids.begin(), got.timed_out_ids.end()),
              want.timed_out);
    EXPECT_EQ(got.duration_s, want.duration);
  }
}

TEST(RunRound, QuorumIsMinimalInAccumulationOrder) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<double> powers;
    for (std::size_t i = 0; i < n; ++i) powers.push_back(std::exp(1.5 * rng.normal()));
    const auto cfg = round_config(0.2 + 3.0 * rng.uniform(), 0.1 + 0.9 * rng.uniform());
    auto s = state_of(powers);
    const auto out = run_round(s, 1 + rng.below(5), cfg);
    if (!out.success) continue;

    double total = 0.0;
    for (double p : powers) total += p;
    double without_last = 0.0;
    for (std::size_t i = 0; i + 1 < out.quorum_ids.size(); ++i) without_last += powers[out.quorum_ids[i]];
    EXPECT_LT(without_last, cfg.threshold * total);
    EXPECT_LE(out.duration_s, cfg.timeout_s);
    for (auto id : out.quorum_ids) {
      EXPECT_EQ(std::count(out.timed_out_ids.begin(), out.timed_out_ids.end(), id), 0);
      EXPECT_EQ(s.participants[id].timeout_streak, 0u);
    }
  }
}

TEST(RunRound, DemandAboveWeakestPowerForcesTimeouts) {
  // With the timeout equal to the round period, anyone whose power is below
  // the per-second demand cannot finish the round in time.
  const auto powers = sample_powers(500, PowerDistribution{}, 8);
  const double weakest = *std::min_element(powers.begin(), powers.end());
  const DemandModel model{0.1};
  for (std::uint64_t users : {10ULL, 100ULL, 1000ULL, 10000ULL, 100000ULL}) {
    auto s = state_of(powers);
    const double rate = demand(users, model);
    const auto out = run_round(s, static_cast<std::uint64_t>(rate), round_config(1.0, 0.5));
    if (rate > weakest) {
      EXPECT_GT(capacity_shortfall(users, model, powers), 0.0);
      EXPECT_FALSE(out.timed_out_ids.empty()) << users;
    }
  }
}

TEST(ApplyDropout, ExcludesPermanently) {
  auto s = state_of({1, 2, 3});
  s.participants[0].timeout_streak = 3;
  s.participants[1].timeout_streak = 2;
  EXPECT_EQ(apply_dropout(s, 3), 1u);
  EXPECT_FALSE(s.participants[0].active);
  EXPECT_TRUE(s.participants[1].active);
  EXPECT_EQ(apply_dropout(s, std::nullopt), 0u);

  // no rejoin even after the streak clears
  run_round(s, 0, SystemConfig{});
  EXPECT_FALSE(s.participants[0].active);
}

TEST(MinQuorumSize, Examples) {
  EXPECT_EQ(min_quorum_size(std::vector<double>{1, 1, 1, 1}, 0.5), 2u);
  EXPECT_EQ(min_quorum_size(std::vector<double>{3, 1, 1, 1}, 0.5), 1u);
  EXPECT_EQ(min_quorum_size(std::vector<double>{7.5}, 1.0), 1u);
  EXPECT_EQ(min_quorum_size(std::vector<double>{7.5}, 0.01), 1u);
  EXPECT_EQ(min_quorum_size(std::vector<double>{1, 2, 3}, 1.0), 3u);
}

TEST(MinQuorumSize, Errors) {
  EXPECT_THROW(min_quorum_size(std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW(min_quorum_size(std::vector<double>{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(min_quorum_size(std::vector<double>{1.0}, 1.1), std::invalid_argument);
}

TEST(MinQuorumSize, BruteForceSubsetsExamples) {
  EXPECT_EQ(oracle::brute_force_min_cartel({3, 1, 1, 1}, 0.5), 1u);
  EXPECT_EQ(oracle::brute_force_min_cartel({1, 1, 1, 1}, 0.5), 2u);
}

TEST(MinQuorumSize, GreedyEqualsExhaustiveMinimum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    for (std::size_t n = 1; n <= 15; ++n) {
      std::vector<double> powers;
      for (std::size_t i = 0; i < n; ++i) powers.push_back(std::exp(1.5 * rng.normal()));
      for (double theta : {0.34, 0.5, 0.67})
        ASSERT_EQ(min_quorum_size(powers, theta), oracle::brute_force_min_cartel(powers, theta))
            << "seed " << seed << " n " << n << " theta " << theta;
    }
  }
}

SystemConfig scenario_config() {
  SystemConfig c;
  c.population_size = 1000;
  c.user_schedule = {1000, GrowthMode::geometric, 2.0, 20};
  return c;
}

TEST(RunScenario, NoExclusionWhenDemandBelowWeakestPower) {
  SystemConfig c = scenario_config();
  c.power_distribution = {DistributionKind::lognormal, 0.0, 1.0, false};
  const auto powers = initial_powers(c);
  const double weakest = *std::min_element(powers.begin(), powers.end());
  c.per_user_rate = 0.5 * weakest / 100.0;
  c.user_schedule = {100, GrowthMode::linear, 0.0, 15};
  const auto res = run_scenario(c);
  ASSERT_EQ(res.records.size(), 15u);
  for (const auto& r : res.records) {
    EXPECT_EQ(r.active_participants, 1000u);
    EXPECT_TRUE(r.round_success);
  }
}

TEST(RunScenario, GeometricGrowthMatchesShortfallRecount) {
  const SystemConfig c = scenario_config();
  const auto res = run_scenario(c);
  const auto& powers = res.initial_powers;
  const DemandModel model{c.per_user_rate};
  ASSERT_FALSE(res.records.empty());

  // Demand only rises and timeout == round period, so a participant is gone at
  // the end of epoch e exactly when it fell short at epoch e - (k - 1).
  const std::uint32_t k = *c.dropout_k;
  for (const auto& r : res.records) {
    std::uint64_t expected = powers.size();
    if (r.epoch + 1 >= k) {
      const auto users = users_at(c.user_schedule, r.epoch + 1 - k);
      const double share = capacity_shortfall(users, model, powers);
      expected = powers.size() - static_cast<std::uint64_t>(std::llround(share * powers.size()));
    }
    EXPECT_EQ(r.active_participants, expected) << "epoch " << r.epoch;
  }

  for (std::size_t i = 1; i < res.records.size(); ++i)
    EXPECT_LE(res.records[i].active_participants, res.records[i - 1].active_participants);

  // Demand passes the median at epoch 1, so attrition is visible from epoch
  // k on and continues while the population is still dense.
  for (std::size_t i = k; i < res.records.size() && res.records[i].active_participants > 50; ++i)
    EXPECT_LT(res.records[i].active_participants, res.records[i - 1].active_participants)
        << "epoch " << i;
}

TEST(RunScenario, DisabledDropoutKeepsEveryone) {
  SystemConfig c = scenario_config();
  c.dropout_k.reset();
  const auto res = run_scenario(c);
  ASSERT_EQ(res.records.size(), c.user_schedule.epochs);
  EXPECT_FALSE(res.compromised_at_epoch);
  for (const auto& r : res.records) EXPECT_EQ(r.active_participants, 1000u);
  EXPECT_FALSE(res.records.back().round_success);
}

TEST(RunScenario, CompromiseEndsTheSeries) {
  const auto res = run_scenario(scenario_config());
  ASSERT_TRUE(res.compromised_at_epoch);
  EXPECT_EQ(res.records.size(), *res.compromised_at_epoch + 1);
  const auto& last = res.records.back();
  EXPECT_EQ(last.active_participants, 0u);
  EXPECT_EQ(last.min_cartel_size, 0u);
  EXPECT_EQ(last.cartel_prob, 1.0);
  EXPECT_FALSE(last.decentralized);
}

TEST(RunScenario, Deterministic) {
  const auto c = scenario_config();
  EXPECT_EQ(run_scenario(c), run_scenario(c));
  auto other = c;
  other.rng_seed = 43;
  EXPECT_NE(run_scenario(c).records, run_scenario(other).records);
}

TEST(RunScenario, ChargesFullLoadToEveryGroupMember) {
  const auto res = run_scenario(scenario_config());
  for (const auto& r : res.records) {
    EXPECT_EQ(r.consensus_rate, r.demand_rate);
    EXPECT_EQ(r.offchain_rate, 0.0);
    EXPECT_GE(r.avg_power_historical, 0.0);
  }
}

TEST(RunScenario, InvalidConfigRejected) {
  auto c = scenario_config();
  c.threshold = 1.5;
  EXPECT_THROW(run_scenario(c), ConfigError);
}

}  // namespace
}  // namespace dcs
