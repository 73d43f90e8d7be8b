// Command-line entry point: run, eval, aggregate, plot, casestudy.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "deepex/casestudy/report.hpp"
#include "deepex/enn/checkpoint.hpp"
#include "deepex/errors.hpp"
#include "deepex/harness/config.hpp"
#include "deepex/harness/csv.hpp"
#include "deepex/harness/experiment.hpp"
#include "deepex/harness/metrics.hpp"
#include "deepex/harness/plot.hpp"

namespace {

using namespace deepex;

constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

int cmd_run(const std::string& config_path, const std::string& out_dir, bool quiet) {
  const auto config = harness::load_experiment_config(config_path);
  const auto result = harness::run_experiment(config, quiet ? nullptr : &std::cerr);
  harness::write_artifacts(result, config, out_dir);
  std::cout << harness::metrics_text_table(result.metrics);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path, const std::string& out) {
  const auto config = harness::load_experiment_config(config_path);
  if (!config.eval) throw ConfigError(config_path + " has no [eval] table");
  const auto checkpoint = enn::load_checkpoint(checkpoint_path);
  std::vector<std::size_t> trained;
  if (checkpoint.metadata.contains("training_users"))
    trained = checkpoint.metadata.at("training_users").get<std::vector<std::size_t>>();
  const auto result =
      harness::evaluate_frozen(checkpoint, config.eval->environment, trained, config.eval->life_cycles, config.seeds);

  auto json = harness::metrics_to_json(result.metrics);
  json["checksum_before"] = result.checksum_before;
  json["checksum_after"] = result.checksum_after;
  if (out.empty()) {
    std::cout << json.dump(2) << '\n';
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + out);
    f << json.dump(2) << '\n';
    std::cout << harness::metrics_text_table(result.metrics);
  }
  if (result.checksum_before != result.checksum_after) {
    std::cerr << "error: parameters changed during evaluation\n";
    return kExitValidation;
  }
  return 0;
}

int cmd_aggregate(const std::vector<std::string>& paths, const std::string& json_out) {
  std::vector<harness::RunRecord> records;
  for (const auto& p : paths) {
    auto part = harness::read_records(std::filesystem::path(p));
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto table = harness::compute_metrics(records);
  std::cout << harness::metrics_text_table(table);
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  if (!json_out.empty()) {
    std::ofstream f(json_out, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + json_out);
    f << harness::metrics_to_json(table).dump(2) << '\n';
  }
  return 0;
}

int cmd_casestudy(const std::string& claim, std::uint64_t seed, const std::string& out) {
  std::vector<casestudy::ClaimResult> results;
  if (claim == "all") {
    for (const auto& id : casestudy::claim_ids()) results.push_back(casestudy::run_claim(id, seed));
  } else {
    results.push_back(casestudy::run_claim(claim, seed));
  }
  const auto report = casestudy::make_report(results, seed);
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + out);
    f << report.dump(2) << '\n';
  }
  for (const auto& r : results) std::cerr << (r.pass ? "PASS " : "FAIL ") << r.id << '\n';
  return report.at("pass").get<bool>() ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  harness::configure_allocator();
  CLI::App app{"Deep-exploration recommender experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, json_out, csv_path, svg_path, claim;
  std::vector<std::string> csv_paths;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Train agents over seeds and write CSV/JSON/SVG artifacts");
  run->add_option("--config", config_path, "TOML experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--quiet", quiet, "No per-seed progress on stderr");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on out-of-sample users without training");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_path, "TOML config with an [eval] table")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", json_out, "Write metrics JSON here instead of stdout");

  auto* agg = app.add_subcommand("aggregate", "Mean and standard error per agent across seeds");
  agg->add_option("csv", csv_paths, "records.csv files")->required()->check(CLI::ExistingFile);
  agg->add_option("--json", json_out, "Also write the summary as JSON");

  auto* plot = app.add_subcommand("plot", "Learning-curve SVG from a records CSV");
  plot->add_option("csv", csv_path, "records.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", svg_path, "SVG output path")->required();

  auto* cs = app.add_subcommand("casestudy", "Monte Carlo check of the tabular sample-complexity claims");
  cs->add_option("--claim", claim, "Claim id or 'all'")->required();
  cs->add_option("--seed", seed, "Monte Carlo seed");
  cs->add_option("--out", json_out, "Write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, quiet);
    if (*eval) return cmd_eval(checkpoint_path, config_path, json_out);
    if (*agg) return cmd_aggregate(csv_paths, json_out);
    if (*plot) {
      harness::emit_plot(csv_path, svg_path);
      return 0;
    }
    if (*cs) return cmd_casestudy(claim, seed, json_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
