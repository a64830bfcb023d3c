#pragma once

// Experiment orchestration: single runs, parameter sweeps and multi-seed
// batches, with deterministic file output.

#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcs/harness/config.hpp"
#include "dcs/harness/csv.hpp"
#include "dcs/metrics.hpp"
#include "dcs/mitigations.hpp"
#include "dcs/scenario.hpp"

namespace dcs::harness {

inline constexpr const char* kToolName = "dcs-sim";
inline constexpr const char* kToolVersion = "0.1.0";

struct SweepAxis {
  std::string param;
  std::vector<double> values;
};

struct RunManifest {
  HarnessConfig config;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
  std::optional<SweepAxis> sweep;
  std::string tool_version = kToolVersion;
  unsigned jobs = 1;
  bool write_powers = false;
};

inline ScenarioResult run_scenario_kind(const HarnessConfig& cfg) {
  switch (cfg.scenario) {
    case ScenarioKind::base: return run_scenario(cfg.system);
    case ScenarioKind::channels: return simulate_channels(cfg.system, cfg.channels);
    case ScenarioKind::sharding: return simulate_sharding(cfg.system, cfg.sharding);
  }
  throw std::logic_error("unknown scenario kind");
}

inline json lemma_json(const ScenarioResult& result, const LemmaCriteria& criteria) {
  json reports = json::array();
  for (Lemma lemma : {Lemma::L1, Lemma::L2, Lemma::L3, Lemma::main}) {
    json entry{{"lemma_id", std::string(to_string(lemma))}};
    try {
      const auto r = verify_lemma(result, lemma, criteria);
      entry["confirmed"] = r.confirmed;
      entry["trend_statistic"] = r.trend_statistic;
      entry["p_epochs"] = r.p_epochs;
      entry["details"] = r.details;
    } catch (const std::invalid_argument& e) {
      entry["confirmed"] = false;
      entry["error"] = e.what();
    }
    reports.push_back(std::move(entry));
  }
  return reports;
}

namespace detail {

struct Cell {
  std::optional<double> param_value;
  HarnessConfig config;
  std::string digest;
  std::uint64_t seed = 0;
};

struct CellOutcome {
  json summary;
  std::string csv;
  std::string lemmas;
  std::string powers;
};

inline std::string powers_csv(const ScenarioResult& result) {
  std::string out = "id,power\n";
  for (std::size_t i = 0; i < result.initial_powers.size(); ++i)
    out += std::to_string(i) + ',' + dcs::detail::format_double(result.initial_powers[i]) + '\n';
  return out;
}

inline std::string stem(const Cell& cell) {
  return std::string(to_string(cell.config.scenario)) + "_" + cell.digest + "_seed" +
         std::to_string(cell.seed);
}

inline CellOutcome execute(const Cell& cell, bool with_powers) {
  CellOutcome out;
  out.summary = {{"digest", cell.digest}, {"seed", cell.seed}, {"stem", stem(cell)}};
  if (cell.param_value) out.summary["param_value"] = *cell.param_value;
  try {
    HarnessConfig cfg = cell.config;
    cfg.system.rng_seed = cell.seed;
    const auto result = run_scenario_kind(cfg);
    const json lemmas = {{"seed", cell.seed},
                         {"config_digest", cell.digest},
                         {"rng", result.rng_id},
                         {"reports", lemma_json(result, cfg.criteria)}};
    out.csv = to_csv(result);
    out.lemmas = lemmas.dump(2) + "\n";
    if (with_powers) out.powers = powers_csv(result);
    out.summary["epochs"] = result.records.size();
    out.summary["compromised_at_epoch"] =
        result.compromised_at_epoch ? json(*result.compromised_at_epoch) : json(nullptr);
    json confirmed;
    for (const auto& r : lemmas["reports"]) confirmed[r["lemma_id"].get<std::string>()] = r["confirmed"];
    out.summary["lemmas_confirmed"] = confirmed;
  } catch (const std::exception& e) {
    out.summary["error"] = e.what();
  }
  return out;
}

}  // namespace detail

// Runs every (parameter value, seed) cell of the manifest and writes one CSV
// and one lemma report per cell, plus a summary. Returns the summary. Cell
// failures are recorded in the summary; only harness failures throw.
inline json run(const RunManifest& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(manifest.out_dir, ec);
  if (ec || !std::filesystem::is_directory(manifest.out_dir))
    throw IoError("cannot create output directory " + manifest.out_dir.string());

  std::vector<detail::Cell> cells;
  const json base_doc = config_to_json(manifest.config);
  auto add_cells = [&](const HarnessConfig& cfg, std::optional<double> value) {
    const std::string digest = manifest_digest(cfg);
    for (std::uint64_t seed : manifest.seeds) cells.push_back({value, cfg, digest, seed});
  };
  if (manifest.sweep) {
    for (double v : manifest.sweep->values)
      add_cells(config_from_json(with_param(base_doc, manifest.sweep->param, v)), v);
  } else {
    add_cells(manifest.config, std::nullopt);
  }

  // Cells are independent; results are gathered by index so output does not
  // depend on scheduling.
  std::vector<detail::CellOutcome> outcomes(cells.size());
  const std::size_t jobs = std::max(1u, manifest.jobs);
  for (std::size_t start = 0; start < cells.size(); start += jobs) {
    std::vector<std::future<detail::CellOutcome>> batch;
    const std::size_t end = std::min(cells.size(), start + jobs);
    for (std::size_t i = start; i < end; ++i)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                 detail::execute, std::cref(cells[i]), manifest.write_powers));
    for (std::size_t i = start; i < end; ++i) outcomes[i] = batch[i - start].get();
  }

  json summary;
  summary["tool"] = kToolName;
  summary["tool_version"] = manifest.tool_version;
  summary["rng"] = kRngId;
  summary["scenario"] = std::string(to_string(manifest.config.scenario));
  summary["config_digest"] = manifest_digest(manifest.config);
  summary["config"] = base_doc;
  summary["seeds"] = manifest.seeds;
  if (manifest.sweep) {
    summary["sweep"] = {{"param", manifest.sweep->param}, {"values", manifest.sweep->values}};
  }
  summary["cells"] = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& out = outcomes[i];
    if (!out.csv.empty()) {
      const std::string stem = detail::stem(cells[i]);
      write_file(manifest.out_dir / (stem + ".csv"), out.csv);
      write_file(manifest.out_dir / (stem + "_lemmas.json"), out.lemmas);
      if (!out.powers.empty()) write_file(manifest.out_dir / (stem + "_powers.csv"), out.powers);
    }
    summary["cells"].push_back(std::move(out.summary));
  }
  const char* name = manifest.sweep ? "sweep_summary.json" : "run_summary.json";
  write_file(manifest.out_dir / name, summary.dump(2) + "\n");
  return summary;
}

}  // namespace dcs::harness
