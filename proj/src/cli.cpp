#include "ecosim/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ecosim/metrics.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/toml.hpp"
#include "ecosim/world.hpp"

namespace ecosim::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using policies::PolicyType;

std::vector<PolicyType> parse_policy_assignment(const std::string& text, int n_riders) {
  std::vector<PolicyType> out;
  const std::string all_prefix = "all:";
  if (text.rfind(all_prefix, 0) == 0) {
    auto type = policies::parse_policy_type(text.substr(all_prefix.size()));
    if (!type) throw std::invalid_argument("unknown policy type in '" + text + "'");
    out.assign(static_cast<std::size_t>(n_riders), *type);
    return out;
  }
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    auto type = policies::parse_policy_type(token);
    if (!type) throw std::invalid_argument("unknown policy type '" + token + "'");
    out.push_back(*type);
  }
  if (static_cast<int>(out.size()) != n_riders) {
    throw std::invalid_argument("policy list names " + std::to_string(out.size()) +
                                " riders, scenario has " + std::to_string(n_riders));
  }
  return out;
}

namespace {

std::string policies_string(const std::vector<PolicyType>& assignment) {
  std::string out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (i) out += ",";
    out += std::string(policies::to_string(assignment[i]));
  }
  return out;
}

bool any_backend_policy(const std::vector<PolicyType>& assignment) {
  for (PolicyType t : assignment) {
    if (t == PolicyType::llm || t == PolicyType::framework) return true;
  }
  return false;
}

std::string make_run_id(const ScenarioConfig& cfg, const std::vector<PolicyType>& assignment) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);
  const std::string digest_input = config_to_json(cfg).dump() + policies_string(assignment);
  char digest[9];
  std::snprintf(digest, sizeof(digest), "%08x",
                static_cast<unsigned>(fnv1a64(digest_input) & 0xFFFFFFFFu));
  return std::string(stamp) + "-" + digest;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

json fixture_to_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  return json::parse(in);
}

}  // namespace

int cmd_run(const RunManifest& manifest, LlmBackend* backend_override, std::string* run_dir_out) {
  // Load and validate the scenario.
  ConfigValidation report;
  ScenarioConfig cfg = load_scenario_file(manifest.scenario_path, report);
  if (!report.ok()) {
    std::cerr << "scenario error: " << report.joined() << "\n";
    return kExitConfigError;
  }
  if (manifest.seed_override) cfg.rng_seed = *manifest.seed_override;

  if (static_cast<int>(manifest.policies.size()) != cfg.n_riders) {
    std::cerr << "policy assignment names " << manifest.policies.size() << " riders, scenario has "
              << cfg.n_riders << "\n";
    return kExitConfigError;
  }

  // Templates.
  prompt::TemplateRegistry templates = prompt::TemplateRegistry::with_defaults();
  if (!manifest.templates_dir.empty()) {
    try {
      templates.load_dir(manifest.templates_dir);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kExitConfigError;
    }
  }

  // Backend.
  std::unique_ptr<LlmBackend> owned_backend;
  LlmBackend* backend = backend_override;
  json fixture_json;
  if (!backend) {
    if (manifest.mode == BackendMode::scripted) {
      if (manifest.fixture_path.empty()) {
        if (any_backend_policy(manifest.policies)) {
          std::cerr << "scripted mode with llm/framework policies requires --fixture\n";
          return kExitConfigError;
        }
        owned_backend = std::make_unique<ScriptedBackend>(std::map<std::string, std::string>{});
      } else {
        try {
          owned_backend = std::make_unique<ScriptedBackend>(
              ScriptedBackend::from_file(manifest.fixture_path));
          fixture_json = fixture_to_json(manifest.fixture_path);
        } catch (const std::exception& e) {
          std::cerr << e.what() << "\n";
          return kExitConfigError;
        }
      }
    } else {
      owned_backend = std::make_unique<HttpBackend>(cfg.llm);
    }
    backend = owned_backend.get();
  }

  // Output directory.
  const std::string run_id = make_run_id(cfg, manifest.policies);
  const fs::path run_dir = fs::path(manifest.out_dir) / run_id;
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << run_dir << ": " << ec.message() << "\n";
    return kExitConfigError;
  }
  if (run_dir_out) *run_dir_out = run_dir.string();

  // Manifest first: a run directory is self-describing even if the run dies.
  json mj;
  mj["run_id"] = run_id;
  mj["scenario_path"] = manifest.scenario_path;
  mj["scenario"] = config_to_json(cfg);
  mj["policies"] = policies_string(manifest.policies);
  mj["backend"] = manifest.mode == BackendMode::scripted ? "scripted" : "live";
  mj["fixture_path"] = manifest.fixture_path;
  if (!fixture_json.is_null()) mj["fixture"] = fixture_json;
  mj["seed"] = cfg.rng_seed;
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
    mj["created_utc"] = stamp;
  }
  write_text((run_dir / "manifest.json").string(), mj.dump(2) + "\n");

  // Run.
  try {
    JsonlSink sink((run_dir / "events.jsonl").string());
    world::RunResult result = world::run(cfg, manifest.policies, backend, &templates, &sink,
                                         (run_dir / "memory").string());
    sink.close();
    std::ostringstream daily;
    daily << daily_csv_header() << "\n";
    for (const auto& row : result.daily) daily << to_csv(row) << "\n";
    write_text((run_dir / "daily.csv").string(), daily.str());
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitBackendError;
  }
  return kExitOk;
}

namespace {

std::string csv_f(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct LoadedRun {
  std::string dir;
  metrics::RunData data;
};

}  // namespace

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& report_dir) {
  if (run_dirs.empty()) {
    std::cerr << "report: need at least one run directory\n";
    return kExitConfigError;
  }
  std::vector<LoadedRun> runs;
  std::vector<std::string> corrupt;
  for (const auto& dir : run_dirs) {
    try {
      runs.push_back({dir, metrics::load_run_dir(dir)});
    } catch (const std::exception& e) {
      corrupt.push_back(dir + ": " + e.what());
    }
  }
  if (!corrupt.empty()) {
    for (const auto& line : corrupt) std::cerr << "corrupt run: " << line << "\n";
    return kExitCorruptLog;
  }

  std::error_code ec;
  fs::create_directories(report_dir, ec);
  if (ec) {
    std::cerr << "cannot create report directory: " << ec.message() << "\n";
    return kExitConfigError;
  }

  std::ostringstream md;
  md << "# Run report\n";

  for (const auto& run : runs) {
    const std::string tag =
        runs.size() > 1 ? fs::path(run.dir).filename().string() + "_" : std::string();
    md << "\n## " << run.dir << "\n\n";

    // Involution series.
    {
      const auto series = metrics::involution_series(run.data.daily);
      std::ostringstream csv;
      csv << "day,involution\n";
      for (std::size_t i = 0; i < series.size(); ++i) {
        csv << (i + 1) << "," << csv_f(series[i]) << "\n";
      }
      write_text(report_dir + "/" + tag + "involution.csv", csv.str());
      if (!series.empty()) {
        md << "- final involution: " << csv_f(series.back()) << "\n";
      }
    }

    // Acceptance rates per policy type.
    {
      std::set<std::string> types;
      for (const auto& row : run.data.daily) types.insert(row.policy);
      std::ostringstream csv;
      csv << "policy,offers,accepts,rate\n";
      for (const auto& type : types) {
        std::int64_t offers = 0, accepts = 0;
        for (const auto& row : run.data.daily) {
          if (row.policy != type) continue;
          offers += row.offers;
          accepts += row.accepts;
        }
        const double rate = offers > 0 ? static_cast<double>(accepts) / offers : 0.0;
        csv << type << "," << offers << "," << accepts << "," << csv_f(rate) << "\n";
        md << "- acceptance rate (" << type << "): " << csv_f(rate) << "\n";
      }
      write_text(report_dir + "/" + tag + "acceptance.csv", csv.str());
    }

    // Desire distribution (framework agents only; skip when absent).
    try {
      const auto rows = metrics::desire_distribution(run.data.daily);
      std::ostringstream csv;
      csv << "day,frac_income,frac_health,frac_rank\n";
      for (const auto& r : rows) {
        csv << r.day << "," << csv_f(r.frac_income) << "," << csv_f(r.frac_health) << ","
            << csv_f(r.frac_rank) << "\n";
      }
      write_text(report_dir + "/" + tag + "desire.csv", csv.str());
    } catch (const std::domain_error&) {
      // no framework agents in this run
    }

    // Consistency (income vs happiness DTW).
    try {
      const auto report = metrics::consistency_report(run.data.daily);
      std::ostringstream csv;
      csv << "agent,policy,dtw_z,dtw_raw\n";
      for (const auto& row : report.per_agent) {
        csv << row.agent << "," << row.policy << "," << csv_f(row.dtw_z) << ","
            << csv_f(row.dtw_raw) << "\n";
      }
      for (const auto& [policy, mean] : report.per_type_mean_z) {
        csv << "mean," << policy << "," << csv_f(mean) << ",\n";
        md << "- mean z-DTW(income, happiness) " << policy << ": " << csv_f(mean) << "\n";
      }
      write_text(report_dir + "/" + tag + "consistency.csv", csv.str());
    } catch (const std::domain_error&) {
      md << "- consistency: needs >= 2 days of data\n";
    }
  }

  // Side-by-side comparison for multi-run reports.
  if (runs.size() > 1) {
    std::ostringstream csv;
    csv << "run,final_involution,policy,acceptance_rate,mean_dtw_z\n";
    for (const auto& run : runs) {
      const auto series = metrics::involution_series(run.data.daily);
      const std::string final_inv = series.empty() ? "" : csv_f(series.back());
      std::map<std::string, double> dtw_means;
      try {
        dtw_means = metrics::consistency_report(run.data.daily).per_type_mean_z;
      } catch (const std::domain_error&) {
      }
      std::set<std::string> types;
      for (const auto& row : run.data.daily) types.insert(row.policy);
      for (const auto& type : types) {
        double rate = 0.0;
        try {
          rate = metrics::acceptance_rate_from_daily(run.data.daily, type);
        } catch (const std::domain_error&) {
        }
        csv << fs::path(run.dir).filename().string() << "," << final_inv << "," << type << ","
            << csv_f(rate) << ","
            << (dtw_means.count(type) ? csv_f(dtw_means[type]) : std::string()) << "\n";
      }
    }
    write_text(report_dir + "/comparison.csv", csv.str());
  }

  write_text(report_dir + "/report.md", md.str());
  return kExitOk;
}

int cmd_record_fixtures(const RunManifest& manifest, LlmBackend& live_backend,
                        const std::string& fixture_out, std::string* run_dir_out) {
  RecordingBackend recorder(live_backend);
  RunManifest live = manifest;
  live.mode = BackendMode::live;
  const int code = cmd_run(live, &recorder, run_dir_out);
  try {
    recorder.write_fixture(fixture_out);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  }
  if (code != kExitOk) return code;
  if (recorder.failures() > 0) {
    std::cerr << "recorded fixture is partial: " << recorder.failures()
              << " backend calls failed\n";
    return kExitBackendError;
  }
  return kExitOk;
}

}  // namespace ecosim::cli
