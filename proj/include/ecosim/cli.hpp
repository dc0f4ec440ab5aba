#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecosim/backend.hpp"
#include "ecosim/config.hpp"
#include "ecosim/policies.hpp"

namespace ecosim::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBackendError = 3;
inline constexpr int kExitCorruptLog = 4;

enum class BackendMode { scripted, live };

struct RunManifest {
  std::string scenario_path;
  std::vector<policies::PolicyType> policies;  // one per rider, in id order
  BackendMode mode = BackendMode::scripted;
  std::string fixture_path;  // required in scripted mode when any policy calls the backend
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::string templates_dir;  // optional override of built-in templates
};

// Parses "all:<type>" or a comma list with one entry per rider.
std::vector<policies::PolicyType> parse_policy_assignment(const std::string& text, int n_riders);

// Runs a scenario and writes out_dir/<run-id>/{manifest.json, events.jsonl,
// daily.csv} (+ memory/ snapshots). `backend_override`, when non-null,
// replaces the backend the manifest mode would construct (used by tests and
// fixture recording). run_dir_out receives the created directory.
int cmd_run(const RunManifest& manifest, LlmBackend* backend_override = nullptr,
            std::string* run_dir_out = nullptr);

// Reads >= 1 run directories and writes involution.csv, acceptance.csv,
// desire.csv, consistency.csv and report.md into report_dir (plus
// comparison.csv when more than one run is given). Never mutates run dirs.
int cmd_report(const std::vector<std::string>& run_dirs, const std::string& report_dir);

// Executes a run against a live backend while capturing prompt-hash ->
// response pairs into fixture_out; a partial fixture is still written when
// transport errors occur.
int cmd_record_fixtures(const RunManifest& manifest, LlmBackend& live_backend,
                        const std::string& fixture_out, std::string* run_dir_out = nullptr);

}  // namespace ecosim::cli
