// dcs-sim: run, sweep and verify full-consensus scaling scenarios.
//
//   dcs-sim run    --config ref.json --seed 42 --out results/
//   dcs-sim sweep  --config ref.json --param user_growth --values 1.2,1.5,2.0 --seeds 10 --out sweep/
//   dcs-sim verify --in results/base_<digest>_seed42.csv --lemma L2
//
// Exit codes: 0 success, 2 configuration/input error, 3 I/O error.

#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcs/harness/config.hpp"
#include "dcs/harness/csv.hpp"
#include "dcs/harness/runner.hpp"
#include "dcs/metrics.hpp"
#include "dcs/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw dcs::ConfigError("values", "not a number: '" + item + "'");
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = dcs::harness;

  CLI::App app{"Full-consensus scaling simulator"};
  app.set_version_flag("--version", std::string(h::kToolName) + " " + h::kToolVersion +
                                        "\nrng " + dcs::kRngId);
  app.require_subcommand(1);

  std::string config_path, out_dir, csv_path, lemma_id, param, values_text;
  std::optional<std::uint64_t> seed;
  std::uint64_t seed_count = 1;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario and write its time series");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--seed", seed, "RNG seed (overrides rng_seed in the config)");
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep one config key over several values and seeds");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--param", param, "Config key (dotted path) or alias, e.g. user_growth")->required();
  sweep->add_option("--values", values_text, "Comma-separated values")->required();
  sweep->add_option("--seeds", seed_count, "Seeds per value, counting up from rng_seed")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Check a lemma trend on a harness CSV");
  verify->add_option("--in", csv_path, "Epoch CSV")->required();
  verify->add_option("--lemma", lemma_id, "L1|L2|L3|main")
      ->required()
      ->check(CLI::IsMember({"L1", "L2", "L3", "main"}));
  verify->add_option("--config", config_path, "Optional config supplying verify thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run || *sweep) {
      h::RunManifest manifest;
      manifest.config = h::load_config(config_path);
      manifest.out_dir = out_dir;
      if (*run) {
        manifest.seeds = {seed.value_or(manifest.config.system.rng_seed)};
        manifest.write_powers = true;
      } else {
        for (std::uint64_t i = 0; i < seed_count; ++i)
          manifest.seeds.push_back(manifest.config.system.rng_seed + i);
        manifest.sweep = h::SweepAxis{param, parse_values(values_text)};
        manifest.jobs = jobs;
      }
      const auto summary = h::run(manifest);
      std::size_t failed = 0;
      for (const auto& cell : summary["cells"]) failed += cell.contains("error") ? 1 : 0;
      std::cout << "wrote " << summary["cells"].size() << " cell(s) to " << out_dir;
      if (failed) std::cout << " (" << failed << " failed, see summary)";
      std::cout << "\n";
      return kExitOk;
    }

    dcs::LemmaCriteria criteria;
    if (!config_path.empty()) criteria = h::load_config(config_path).criteria;
    const auto series = h::from_csv(h::read_file(csv_path));
    const auto report = dcs::verify_lemma(series, dcs::parse_lemma(lemma_id), criteria);
    const nlohmann::json out{{"lemma_id", std::string(dcs::to_string(report.lemma_id))},
                             {"confirmed", report.confirmed},
                             {"trend_statistic", report.trend_statistic},
                             {"p_epochs", report.p_epochs},
                             {"details", report.details}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const h::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
