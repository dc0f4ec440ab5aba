// ecosim command-line runner: scenario runs, metric reports, fixture capture.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ecosim/cli.hpp"
#include "ecosim/config.hpp"
#include "ecosim/world.hpp"

namespace {

int load_rider_count(const std::string& scenario_path) {
  ecosim::ConfigValidation report;
  ecosim::ScenarioConfig cfg = ecosim::load_scenario_file(scenario_path, report);
  if (!report.ok()) {
    std::cerr << "scenario error: " << report.joined() << "\n";
    return -1;
  }
  return cfg.n_riders;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecosim - multi-agent O2O delivery ecosystem simulator"};
  app.require_subcommand(1);

  // run
  std::string scenario;
  std::string policies_text = "all:rule";
  std::string backend_text = "scripted";
  std::string fixture;
  std::string out_dir = "out";
  std::string templates_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario and write a run directory");
  run->add_option("--scenario", scenario, "scenario file (.toml or .json)")->required();
  run->add_option("--policies", policies_text,
                  "comma list (one per rider) or all:<rule|rl|imitation|llm|framework>");
  run->add_option("--seed", seed, "override the scenario rng_seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  run->add_option("--backend", backend_text, "scripted or live")
      ->check(CLI::IsMember({"scripted", "live"}));
  run->add_option("--fixture", fixture, "scripted-backend fixture file (JSON)");
  run->add_option("--out", out_dir, "output directory root");
  run->add_option("--templates", templates_dir, "prompt template directory override");

  // report
  std::vector<std::string> run_dirs;
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "compute metrics from run directories");
  report->add_option("dirs", run_dirs, "run directories")->required()->expected(-1);
  report->add_option("--out", report_dir, "report output directory");

  // record-fixtures
  std::string fixture_out = "fixture.json";
  CLI::App* record =
      app.add_subcommand("record-fixtures", "run against the live backend, capture responses");
  record->add_option("--scenario", scenario, "scenario file (.toml or .json)")->required();
  record->add_option("--policies", policies_text, "policy assignment");
  record->add_option("--seed", seed, "override the scenario rng_seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  record->add_option("--out", out_dir, "output directory root");
  record->add_option("--fixture-out", fixture_out, "where to write the captured fixture");
  record->add_option("--templates", templates_dir, "prompt template directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || record->parsed()) {
      const int n_riders = load_rider_count(scenario);
      if (n_riders < 0) return ecosim::cli::kExitConfigError;

      ecosim::cli::RunManifest manifest;
      manifest.scenario_path = scenario;
      manifest.policies = ecosim::cli::parse_policy_assignment(policies_text, n_riders);
      manifest.out_dir = out_dir;
      manifest.templates_dir = templates_dir;
      if (seed_set) manifest.seed_override = seed;

      if (run->parsed()) {
        manifest.mode = backend_text == "live" ? ecosim::cli::BackendMode::live
                                               : ecosim::cli::BackendMode::scripted;
        manifest.fixture_path = fixture;
        std::string run_dir;
        const int code = ecosim::cli::cmd_run(manifest, nullptr, &run_dir);
        if (code == ecosim::cli::kExitOk) std::cout << run_dir << "\n";
        return code;
      }

      // record-fixtures drives a live backend.
      ecosim::ConfigValidation ignored;
      ecosim::ScenarioConfig cfg = ecosim::load_scenario_file(scenario, ignored);
      ecosim::HttpBackend live(cfg.llm);
      std::string run_dir;
      const int code = ecosim::cli::cmd_record_fixtures(manifest, live, fixture_out, &run_dir);
      if (code == ecosim::cli::kExitOk) std::cout << run_dir << "\n";
      return code;
    }

    if (report->parsed()) {
      if (report_dir.empty()) report_dir = run_dirs.front() + "/report";
      return ecosim::cli::cmd_report(run_dirs, report_dir);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return ecosim::cli::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return ecosim::cli::kExitCorruptLog;
  }
  return ecosim::cli::kExitOk;
}
