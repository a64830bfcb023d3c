#pragma once

// Centralization metrics and trend checks over simulated time series.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcs/consensus.hpp"
#include "dcs/core.hpp"

namespace dcs {

// One row of a scenario time series, describing the system at the end of an
// epoch (after the round and any dropout).
struct EpochRecord {
  std::uint32_t epoch = 0;
  std::uint64_t users = 0;
  double demand_rate = 0.0;
  std::uint64_t active_participants = 0;  // C(S)
  double throughput_rate = 0.0;           // T(S)
  double avg_power_historical = 0.0;      // c
  std::uint64_t min_cartel_size = 0;
  double cartel_prob = 0.0;
  double gini = 0.0;
  bool decentralized = false;
  bool round_success = false;
  // Not part of the CSV schema.
  double consensus_rate = 0.0;  // messages/second put to a vote, all groups
  double group_rate = 0.0;      // messages/second each group votes on
  double offchain_rate = 0.0;   // messages/second settled outside consensus
  bool offchain_saturated = false;  // channel layer asked for more than its capacity

  bool operator==(const EpochRecord&) const = default;
};

struct ScenarioResult {
  std::vector<EpochRecord> records;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string rng_id;
  // Epoch at whose end a consensus group emptied; the series stops there.
  std::optional<std::uint32_t> compromised_at_epoch;
  std::vector<double> initial_powers;

  bool operator==(const ScenarioResult&) const = default;
};

enum class Lemma { L1, L2, L3, main };

inline std::string_view to_string(Lemma lemma) {
  switch (lemma) {
    case Lemma::L1: return "L1";
    case Lemma::L2: return "L2";
    case Lemma::L3: return "L3";
    case Lemma::main: return "main";
  }
  return "?";
}

inline Lemma parse_lemma(std::string_view text) {
  if (text == "L1") return Lemma::L1;
  if (text == "L2") return Lemma::L2;
  if (text == "L3") return Lemma::L3;
  if (text == "main") return Lemma::main;
  throw std::invalid_argument("unknown lemma id: " + std::string(text));
}

struct LemmaReport {
  Lemma lemma_id = Lemma::L1;
  bool confirmed = false;
  double trend_statistic = 0.0;
  std::size_t p_epochs = 0;
  std::string details;
};

struct LemmaCriteria {
  double min_abs_rho = 0.9;
  double cartel_prob_level = 0.5;  // main theorem fallback when still decentralized
};

class InsufficientVariation : public std::invalid_argument {
 public:
  InsufficientVariation() : std::invalid_argument("insufficient variation") {}
};

// Same contract as min_quorum_size: the smallest coalition able to decide
// (and therefore censor) on its own.
inline std::size_t min_cartel_size(std::span<const double> powers, double threshold) {
  return min_quorum_size(powers, threshold);
}

// Closed-form collusion risk: a single controller (k = 1) is a cartel with
// certainty, and each additional member needed lowers the odds by exp(-beta).
inline double cartel_probability(std::size_t k_min, double beta) {
  if (k_min == 0) throw std::invalid_argument("cartel_probability: k_min must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("cartel_probability: beta must be > 0");
  return std::exp(-beta * static_cast<double>(k_min - 1));
}

// Population Gini coefficient: mean absolute difference over 2 * mean.
inline double gini(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("gini: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0) throw std::invalid_argument("gini: negative value");
  const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (sum == 0.0) throw std::invalid_argument("gini: all values are zero");

  const double n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
  return weighted / (n * sum);
}

namespace detail {

// 1-based ranks, ties share the average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties. Zero when either
// series is constant.
inline double rank_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("rank_correlation: length mismatch");
  if (xs.size() < 2) return 0.0;
  const auto rx = detail::average_ranks(xs);
  const auto ry = detail::average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

inline LemmaReport trend_report(Lemma id, std::span<const double> users,
                                std::span<const double> target, double sign,
                                const LemmaCriteria& criteria, const char* what) {
  LemmaReport report;
  report.lemma_id = id;
  report.p_epochs = users.size();
  report.trend_statistic = rank_correlation(users, target);
  report.confirmed = sign * report.trend_statistic >= criteria.min_abs_rho;
  report.details = std::string(what) + (sign > 0 ? " rises" : " falls") +
                   " with users: rho=" + format_double(report.trend_statistic) +
                   (report.confirmed ? " meets" : " misses") + " |rho|>=" +
                   format_double(criteria.min_abs_rho);
  return report;
}

}  // namespace detail

// Checks one monotonicity claim against a scenario time series:
//   L1   demand minus historical average power grows with users
//   L2   coordination cost shrinks with users
//   L3   cartel probability grows with users
//   main L2 and L3 hold and the final epoch is centralized or cartel-prone
inline LemmaReport verify_lemma(const ScenarioResult& series, Lemma lemma,
                                const LemmaCriteria& criteria = {}) {
  const auto& rows = series.records;
  if (rows.size() < 3) throw InsufficientVariation();
  const bool varies = std::any_of(rows.begin(), rows.end(), [&](const EpochRecord& r) {
    return r.users != rows.front().users;
  });
  if (!varies) throw InsufficientVariation();

  std::vector<double> users, gap, active, cartel;
  for (const auto& r : rows) {
    users.push_back(static_cast<double>(r.users));
    gap.push_back(r.demand_rate - r.avg_power_historical);
    active.push_back(static_cast<double>(r.active_participants));
    cartel.push_back(r.cartel_prob);
  }

  switch (lemma) {
    case Lemma::L1:
      return detail::trend_report(lemma, users, gap, +1.0, criteria,
                                  "demand_rate - avg_power_historical");
    case Lemma::L2:
      return detail::trend_report(lemma, users, active, -1.0, criteria,
                                  "active_participants");
    case Lemma::L3:
      return detail::trend_report(lemma, users, cartel, +1.0, criteria, "cartel_prob");
    case Lemma::main: {
      const auto l2 = verify_lemma(series, Lemma::L2, criteria);
      const auto l3 = verify_lemma(series, Lemma::L3, criteria);
      const auto& last = rows.back();
      const bool captured = !last.decentralized || last.cartel_prob >= criteria.cartel_prob_level;
      LemmaReport report;
      report.lemma_id = lemma;
      report.p_epochs = rows.size();
      report.trend_statistic = l3.trend_statistic;
      report.confirmed = l2.confirmed && l3.confirmed && captured;
      report.details = std::string("L2 ") + (l2.confirmed ? "confirmed" : "unconfirmed") +
                       ", L3 " + (l3.confirmed ? "confirmed" : "unconfirmed") +
                       ", final epoch " + (last.decentralized ? "decentralized" : "centralized") +
                       " with cartel_prob=" + detail::format_double(last.cartel_prob);
      return report;
    }
  }
  throw std::invalid_argument("verify_lemma: unknown lemma");
}

}  // namespace dcs
