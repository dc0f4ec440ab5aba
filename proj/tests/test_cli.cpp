#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecosim/cli.hpp"
#include "ecosim/metrics.hpp"
#include "ecosim/rng.hpp"

using namespace ecosim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& stem) {
    path = fs::temp_directory_path() / (stem + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(content)));
  return std::string(hex) + ":" + std::to_string(content.size());
}

fs::path write_scenario(const TempDir& dir, const std::string& name, int riders, int days,
                        Tick tpd) {
  const fs::path p = dir.path / name;
  std::ofstream out(p);
  out << "n_riders = " << riders << "\n"
      << "n_days = " << days << "\n"
      << "ticks_per_day = " << tpd << "\n"
      << "idle_decision_period = 10\n"
      << "pending_expiry_ticks = 30\n";
  return p;
}

fs::path write_fixture(const TempDir& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir.path / name;
  std::ofstream out(p);
  out << body;
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("policy assignment parsing") {
    const auto all = cli::parse_policy_assignment("all:rule", 4);
    CHECK(all.size() == 4);
    CHECK(all[3] == policies::PolicyType::rule);
    const auto mixed = cli::parse_policy_assignment("rule,rl,framework", 3);
    CHECK(mixed[1] == policies::PolicyType::rl);
    CHECK(mixed[2] == policies::PolicyType::framework);
    CHECK_THROWS_AS(cli::parse_policy_assignment("rule,rule", 3), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_policy_assignment("all:quantum", 3), std::invalid_argument);
  }

  TEST_CASE("cmd_run writes the three run files and exits 0") {
    TempDir tmp("ecosim-cli-run");
    const auto scenario = write_scenario(tmp, "s.toml", 3, 1, 240);

    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("all:rule", 3);
    manifest.out_dir = (tmp.path / "out").string();
    manifest.seed_override = 7;

    std::string run_dir;
    CHECK(cli::cmd_run(manifest, nullptr, &run_dir) == cli::kExitOk);
    CHECK(fs::exists(fs::path(run_dir) / "manifest.json"));
    CHECK(fs::exists(fs::path(run_dir) / "events.jsonl"));
    CHECK(fs::exists(fs::path(run_dir) / "daily.csv"));

    const auto daily = read_daily_csv((fs::path(run_dir) / "daily.csv").string());
    CHECK(daily.size() == 3);  // one day, three riders
  }

  TEST_CASE("config errors exit with code 2") {
    TempDir tmp("ecosim-cli-bad");
    const fs::path bad = tmp.path / "bad.toml";
    {
      std::ofstream out(bad);
      out << "n_riders = 2\nmax_held_orders = 0\n";
    }
    cli::RunManifest manifest;
    manifest.scenario_path = bad.string();
    manifest.policies = {policies::PolicyType::rule, policies::PolicyType::rule};
    manifest.out_dir = (tmp.path / "out").string();
    CHECK(cli::cmd_run(manifest) == cli::kExitConfigError);
  }

  TEST_CASE("scripted llm policies without a fixture exit with code 2") {
    TempDir tmp("ecosim-cli-nofix");
    const auto scenario = write_scenario(tmp, "s.toml", 2, 1, 240);
    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("llm,rule", 2);
    manifest.out_dir = (tmp.path / "out").string();
    CHECK(cli::cmd_run(manifest) == cli::kExitConfigError);
  }

  TEST_CASE("identical scripted manifests give identical event logs") {
    TempDir tmp("ecosim-cli-det");
    const auto scenario = write_scenario(tmp, "s.toml", 4, 1, 240);
    const auto fixture = write_fixture(tmp, "f.json", R"({"*": "ACTION: accept"})");

    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("rule,rl,llm,framework", 4);
    manifest.fixture_path = fixture.string();
    manifest.out_dir = (tmp.path / "out").string();

    std::string dir_a, dir_b;
    REQUIRE(cli::cmd_run(manifest, nullptr, &dir_a) == cli::kExitOk);
    REQUIRE(cli::cmd_run(manifest, nullptr, &dir_b) == cli::kExitOk);
    CHECK(file_digest(fs::path(dir_a) / "events.jsonl") ==
          file_digest(fs::path(dir_b) / "events.jsonl"));
    CHECK(file_digest(fs::path(dir_a) / "daily.csv") ==
          file_digest(fs::path(dir_b) / "daily.csv"));
  }

  TEST_CASE("cmd_report writes metric tables and leaves the run untouched") {
    TempDir tmp("ecosim-cli-report");
    const auto scenario = write_scenario(tmp, "s.toml", 4, 2, 240);
    const auto fixture = write_fixture(tmp, "f.json", R"({"*": "ACTION: accept"})");

    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("rule,rl,framework,framework", 4);
    manifest.fixture_path = fixture.string();
    manifest.out_dir = (tmp.path / "out").string();

    std::string run_dir;
    REQUIRE(cli::cmd_run(manifest, nullptr, &run_dir) == cli::kExitOk);
    const auto events_before = file_digest(fs::path(run_dir) / "events.jsonl");
    const auto daily_before = file_digest(fs::path(run_dir) / "daily.csv");

    const std::string report_dir = (tmp.path / "report").string();
    REQUIRE(cli::cmd_report({run_dir}, report_dir) == cli::kExitOk);
    CHECK(fs::exists(fs::path(report_dir) / "involution.csv"));
    CHECK(fs::exists(fs::path(report_dir) / "acceptance.csv"));
    CHECK(fs::exists(fs::path(report_dir) / "desire.csv"));
    CHECK(fs::exists(fs::path(report_dir) / "consistency.csv"));
    CHECK(fs::exists(fs::path(report_dir) / "report.md"));

    // involution.csv has one row per day plus header
    std::ifstream inv(fs::path(report_dir) / "involution.csv");
    std::string line;
    int lines = 0;
    while (std::getline(inv, line))
      if (!line.empty()) ++lines;
    CHECK(lines == 1 + 2);

    // read-only contract
    CHECK(file_digest(fs::path(run_dir) / "events.jsonl") == events_before);
    CHECK(file_digest(fs::path(run_dir) / "daily.csv") == daily_before);

    // fractions re-derivable from raw events
    const auto run = metrics::load_run_dir(run_dir);
    const double from_events = metrics::acceptance_rate(run, "rule");
    const double from_daily = metrics::acceptance_rate_from_daily(run.daily, "rule");
    CHECK(from_events == doctest::Approx(from_daily));

    // multi-run comparison
    std::string run_dir2;
    REQUIRE(cli::cmd_run(manifest, nullptr, &run_dir2) == cli::kExitOk);
    const std::string report2 = (tmp.path / "report2").string();
    REQUIRE(cli::cmd_report({run_dir, run_dir2}, report2) == cli::kExitOk);
    CHECK(fs::exists(fs::path(report2) / "comparison.csv"));
  }

  TEST_CASE("cmd_report rejects corrupt run directories with code 4") {
    TempDir tmp("ecosim-cli-corrupt");
    fs::create_directories(tmp.path / "not-a-run");
    CHECK(cli::cmd_report({(tmp.path / "not-a-run").string()},
                          (tmp.path / "report").string()) == cli::kExitCorruptLog);
  }

  TEST_CASE("record-fixtures captures a replayable fixture") {
    TempDir tmp("ecosim-cli-record");
    const auto scenario = write_scenario(tmp, "s.toml", 2, 1, 240);

    // Deterministic stand-in for a live backend.
    CallbackBackend fake_live(
        [](const std::string& prompt) -> BackendReply {
          const bool wants_number = prompt.find("number between 0 and 1") != std::string::npos;
          return {true, wants_number ? "0.8" : "Sure.\nACTION: accept", ""};
        },
        "fake-live");

    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("llm,framework", 2);
    manifest.out_dir = (tmp.path / "out").string();

    const std::string fixture_out = (tmp.path / "captured.json").string();
    std::string live_dir;
    REQUIRE(cli::cmd_record_fixtures(manifest, fake_live, fixture_out, &live_dir) ==
            cli::kExitOk);
    REQUIRE(fs::exists(fixture_out));

    // Replay: identical decision sequence under the captured fixture.
    cli::RunManifest replay = manifest;
    replay.mode = cli::BackendMode::scripted;
    replay.fixture_path = fixture_out;
    std::string replay_dir;
    REQUIRE(cli::cmd_run(replay, nullptr, &replay_dir) == cli::kExitOk);

    auto decisions_of = [](const std::string& dir) {
      std::vector<std::string> out;
      for (const auto& e : read_events_jsonl(dir + "/events.jsonl")) {
        if (e.kind == EventKind::decision) {
          out.push_back(std::to_string(e.tick) + ":" + std::to_string(e.agent) + ":" +
                        e.payload.at("action").get<std::string>());
        }
      }
      return out;
    };
    CHECK(decisions_of(live_dir) == decisions_of(replay_dir));
  }

  TEST_CASE("manifest.json alone reproduces a scripted run") {
    TempDir tmp("ecosim-cli-manifest");
    const auto scenario = write_scenario(tmp, "s.toml", 3, 1, 240);
    const auto fixture = write_fixture(tmp, "f.json", R"({"*": "ACTION: accept"})");

    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("rule,llm,framework", 3);
    manifest.fixture_path = fixture.string();
    manifest.out_dir = (tmp.path / "out").string();
    std::string run_dir;
    REQUIRE(cli::cmd_run(manifest, nullptr, &run_dir) == cli::kExitOk);

    // Reconstruct everything from manifest.json only.
    std::ifstream in(fs::path(run_dir) / "manifest.json");
    const auto mj = nlohmann::json::parse(in);
    const fs::path scenario2 = tmp.path / "rebuilt_scenario.json";
    std::ofstream(scenario2) << mj.at("scenario").dump();
    const fs::path fixture2 = tmp.path / "rebuilt_fixture.json";
    std::ofstream(fixture2) << mj.at("fixture").dump();

    cli::RunManifest rebuilt;
    rebuilt.scenario_path = scenario2.string();
    rebuilt.policies = cli::parse_policy_assignment(mj.at("policies").get<std::string>(), 3);
    rebuilt.fixture_path = fixture2.string();
    rebuilt.seed_override = mj.at("seed").get<std::uint64_t>();
    rebuilt.out_dir = (tmp.path / "out2").string();
    std::string run_dir2;
    REQUIRE(cli::cmd_run(rebuilt, nullptr, &run_dir2) == cli::kExitOk);
    CHECK(file_digest(fs::path(run_dir) / "events.jsonl") ==
          file_digest(fs::path(run_dir2) / "events.jsonl"));
  }

  TEST_CASE("partial fixture capture exits with the backend error code") {
    TempDir tmp("ecosim-cli-partial");
    const auto scenario = write_scenario(tmp, "s.toml", 2, 1, 240);
    int call = 0;
    CallbackBackend flaky([&call](const std::string&) -> BackendReply {
      if (++call % 3 == 0) return {false, "", "gateway timeout"};
      return {true, "ACTION: accept", ""};
    });
    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("llm,llm", 2);
    manifest.out_dir = (tmp.path / "out").string();
    const std::string fixture_out = (tmp.path / "partial.json").string();
    CHECK(cli::cmd_record_fixtures(manifest, flaky, fixture_out) == cli::kExitBackendError);
    std::ifstream in(fixture_out);
    const auto j = nlohmann::json::parse(in);
    CHECK_FALSE(j.empty());  // the successful calls were still captured
  }

  TEST_CASE("an all-rule run records an empty fixture with exit 0") {
    TempDir tmp("ecosim-cli-empty");
    const auto scenario = write_scenario(tmp, "s.toml", 2, 1, 240);
    CallbackBackend fake_live([](const std::string&) -> BackendReply {
      return {true, "ACTION: accept", ""};
    });
    cli::RunManifest manifest;
    manifest.scenario_path = scenario.string();
    manifest.policies = cli::parse_policy_assignment("all:rule", 2);
    manifest.out_dir = (tmp.path / "out").string();
    const std::string fixture_out = (tmp.path / "empty.json").string();
    CHECK(cli::cmd_record_fixtures(manifest, fake_live, fixture_out) == cli::kExitOk);
    std::ifstream in(fixture_out);
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j.is_object());
    CHECK(j.empty());
  }
}
