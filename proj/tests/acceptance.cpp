// Acceptance suite: one check per criterion, each printing a pass/fail line.
// Returns the number of failed criteria as the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "ecosim/cli.hpp"
#include "ecosim/emotion.hpp"
#include "ecosim/memory.hpp"
#include "ecosim/metrics.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/world.hpp"

using namespace ecosim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Harness {
  int failures = 0;
  void report(int index, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

// ---------------------------------------------------------------------------
// Criterion 1: Eq.-3-style tilt correctness
// ---------------------------------------------------------------------------

bool criterion_tilt(std::string& detail) {
  const auto start = Clock::now();
  Rng rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_below(9);  // 2..10 actions
    desire::ActionDistribution dist;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist.actions.push_back(static_cast<Action>(i % kNumActions));
      dist.base_probs.push_back(rng.next_double() + 1e-3);
      dist.rewards.push_back(rng.next_double() * 20.0 - 10.0);
      sum += dist.base_probs.back();
    }
    for (auto& p : dist.base_probs) p /= sum;
    dist.beta = rng.next_double() * 5.0 + 0.01;

    const auto out = desire::tilt_distribution(dist);
    double total = 0.0;
    for (double p : out) {
      if (p < 0.0 || !std::isfinite(p)) {
        detail = "negative or non-finite tilted probability";
        return false;
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      detail = "tilted probabilities sum to " + std::to_string(total);
      return false;
    }

    const double shift = rng.next_double() * 2000.0 - 1000.0;
    auto shifted = dist;
    for (auto& r : shifted.rewards) r += shift;
    const auto out2 = desire::tilt_distribution(shifted);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(out[i] - out2[i]) > 1e-9) {
        detail = "reward shift changed the distribution";
        return false;
      }
    }
  }

  // Closed form: uniform base over {a, b}, reward(a) = beta*ln2, reward(b) = 0.
  desire::ActionDistribution closed;
  closed.actions = {Action::accept, Action::reject};
  closed.base_probs = {0.5, 0.5};
  closed.beta = 1.0;
  closed.rewards = {std::log(2.0), 0.0};
  const auto out = desire::tilt_distribution(closed);
  if (std::abs(out[0] - 2.0 / 3.0) > 1e-12 || std::abs(out[1] - 1.0 / 3.0) > 1e-12) {
    detail = "closed-form ln2 case off by more than 1e-12";
    return false;
  }

  const double elapsed = seconds_since(start);
  detail = "1000 distributions in " + std::to_string(elapsed) + "s";
  return elapsed < 1.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: DTW equals exhaustive warping-path enumeration
// ---------------------------------------------------------------------------

// Depth-first enumeration of every monotone warping path, accumulating the
// path cost incrementally; no DP table involved.
void enumerate_paths(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                     std::size_t j, double acc, double& best) {
  acc += std::abs(x[i] - y[j]);
  if (i + 1 == x.size() && j + 1 == y.size()) {
    best = std::min(best, acc);
    return;
  }
  if (i + 1 < x.size()) enumerate_paths(x, y, i + 1, j, acc, best);
  if (j + 1 < y.size()) enumerate_paths(x, y, i, j + 1, acc, best);
  if (i + 1 < x.size() && j + 1 < y.size()) enumerate_paths(x, y, i + 1, j + 1, acc, best);
}

double dtw_by_enumeration(const std::vector<double>& x, const std::vector<double>& y) {
  double best = std::numeric_limits<double>::infinity();
  enumerate_paths(x, y, 0, 0, 0.0, best);
  return best;
}

bool criterion_dtw(std::string& detail) {
  const auto start = Clock::now();
  Rng rng(2002);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(1 + rng.next_below(10));
    std::vector<double> y(1 + rng.next_below(10));
    for (auto& v : x) v = rng.next_double() * 10.0 - 5.0;
    for (auto& v : y) v = rng.next_double() * 10.0 - 5.0;

    const double got = metrics::dtw(x, y);
    const double expected = dtw_by_enumeration(x, y);
    if (got != expected) {
      detail = "dtw " + std::to_string(got) + " != enumeration " + std::to_string(expected);
      return false;
    }
    if (metrics::dtw(x, x) != 0.0) {
      detail = "dtw(x,x) != 0";
      return false;
    }
    if (metrics::dtw(x, y) != metrics::dtw(y, x)) {
      detail = "dtw asymmetric";
      return false;
    }
  }
  const double elapsed = seconds_since(start);
  detail = "500 pairs in " + std::to_string(elapsed) + "s";
  return elapsed < 30.0;
}

// ---------------------------------------------------------------------------
// Criterion 3: involution arithmetic and scale invariance
// ---------------------------------------------------------------------------

bool criterion_involution(std::string& detail) {
  const double hand = metrics::involution({{50.0, 150.0}, {10.0, 20.0}});
  if (std::abs(hand - 7.5) > 1e-12) {
    detail = "hand case gave " + std::to_string(hand);
    return false;
  }
  Rng rng(3003);
  for (int trial = 0; trial < 100; ++trial) {
    metrics::InvolutionInputs inp;
    const std::size_t n = 2 + rng.next_below(10);
    for (std::size_t i = 0; i < n; ++i) {
      inp.incomes.push_back(rng.next_double() * 500.0 + 1.0);
      inp.distances.push_back(rng.next_double() * 100.0);
    }
    const double base = metrics::involution(inp);
    const double k = rng.next_double() * 99.0 + 0.01;
    for (auto& v : inp.incomes) v *= k;
    if (std::abs(metrics::involution(inp) - base) > 1e-9 * std::max(1.0, std::abs(base))) {
      detail = "income scaling changed involution";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 4: memory gates match the brute-force oracle
// ---------------------------------------------------------------------------

bool criterion_memory(std::string& detail) {
  Rng rng(4004);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 4 + static_cast<int>(rng.next_below(13));
    memory::MemoryStore store(dim);
    const int n = 1 + static_cast<int>(rng.next_below(100));
    for (int i = 0; i < n; ++i) {
      memory::MemoryRecord r;
      r.created_tick = static_cast<Tick>(rng.next_below(2000));
      r.problem_text = "p";
      r.decision_text = "d";
      r.rationale_text = "r";
      r.embedding.resize(static_cast<std::size_t>(dim));
      for (auto& v : r.embedding) v = rng.next_double() * 2.0 - 1.0;
      r.importance = rng.next_double();
      store.write(std::move(r));
    }
    memory::RetrievalQuery q;
    q.query_embedding.resize(static_cast<std::size_t>(dim));
    for (auto& v : q.query_embedding) v = rng.next_double() * 2.0 - 1.0;
    q.now_tick = 2000;
    q.k = 1 + static_cast<int>(rng.next_below(12));
    q.min_similarity = rng.next_double() * 0.6;
    q.min_importance = rng.next_double() * 0.6;
    q.ttl_ticks = 1 + static_cast<Tick>(rng.next_below(2500));  // includes stale stores

    // Independent filter / sort / truncate oracle.
    struct Entry {
      double sim;
      const memory::MemoryRecord* rec;
    };
    std::vector<Entry> pass;
    for (const auto& r : store.records()) {
      if (q.now_tick - r.created_tick > q.ttl_ticks) continue;
      if (r.importance < q.min_importance) continue;
      const double sim = memory::cosine_similarity(q.query_embedding, r.embedding);
      if (sim < q.min_similarity) continue;
      pass.push_back({sim, &r});
    }
    std::sort(pass.begin(), pass.end(), [](const Entry& a, const Entry& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      if (a.rec->created_tick != b.rec->created_tick) {
        return a.rec->created_tick > b.rec->created_tick;
      }
      return a.rec->id > b.rec->id;
    });
    if (pass.size() > static_cast<std::size_t>(q.k)) pass.resize(static_cast<std::size_t>(q.k));

    const auto got = store.retrieve(q);
    if (got.size() != pass.size()) {
      detail = "result size mismatch";
      return false;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].id != pass[i].rec->id) {
        detail = "result order mismatch at position " + std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criteria 5-9 share scripted 30-day runs
// ---------------------------------------------------------------------------

struct AcceptanceRuns {
  fs::path root;
  std::vector<std::string> mixed_dirs;  // three repetitions
  std::string duel_dir;                 // llm vs framework
  fs::path scenario_path;
  fs::path fixture_path;
  ScenarioConfig cfg;
  double mixed_seconds = 0.0;
  double duel_seconds = 0.0;
  std::string error;

  bool prepare() {
    try {
      root = fs::temp_directory_path() / ("ecosim-acceptance-" + std::to_string(::getpid()));
      fs::remove_all(root);
      fs::create_directories(root);

      ConfigValidation report;
      cfg = ScenarioConfig{};
      const auto v = validate_config(cfg);
      if (!v.ok()) {
        error = v.joined();
        return false;
      }
      scenario_path = root / "scenario.json";
      std::ofstream scenario(scenario_path);
      scenario << config_to_json(cfg).dump(2);
      scenario.close();

      fixture_path = root / "fixture.json";
      std::ofstream fixture(fixture_path);
      fixture << R"({"*": "Income first, take the job.\nACTION: accept"})";
      fixture.close();

      // Three repetitions of the mixed run (2 rule, 2 RL, 2 framework).
      const auto mixed_start = Clock::now();
      for (int rep = 0; rep < 3; ++rep) {
        cli::RunManifest manifest;
        manifest.scenario_path = scenario_path.string();
        manifest.policies =
            cli::parse_policy_assignment("rule,rule,rl,rl,framework,framework", 6);
        manifest.fixture_path = fixture_path.string();
        manifest.out_dir = (root / ("mixed" + std::to_string(rep))).string();
        std::string run_dir;
        if (cli::cmd_run(manifest, nullptr, &run_dir) != cli::kExitOk) {
          error = "mixed run rep " + std::to_string(rep) + " failed";
          return false;
        }
        mixed_dirs.push_back(run_dir);
      }
      mixed_seconds = seconds_since(mixed_start);

      // Income-greedy duel: plain-LLM riders vs framework riders, same fixture.
      const auto duel_start = Clock::now();
      cli::RunManifest duel;
      duel.scenario_path = scenario_path.string();
      duel.policies = cli::parse_policy_assignment("llm,llm,llm,framework,framework,framework", 6);
      duel.fixture_path = fixture_path.string();
      duel.out_dir = (root / "duel").string();
      if (cli::cmd_run(duel, nullptr, &duel_dir) != cli::kExitOk) {
        error = "duel run failed";
        return false;
      }
      duel_seconds = seconds_since(duel_start);
      return true;
    } catch (const std::exception& e) {
      error = e.what();
      return false;
    }
  }

  void cleanup() const {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion_determinism(const AcceptanceRuns& runs, std::string& detail) {
  const std::string first = file_bytes(fs::path(runs.mixed_dirs[0]) / "events.jsonl");
  if (first.empty()) {
    detail = "empty events.jsonl";
    return false;
  }
  for (int rep = 1; rep < 3; ++rep) {
    if (file_bytes(fs::path(runs.mixed_dirs[rep]) / "events.jsonl") != first) {
      detail = "repetition " + std::to_string(rep) + " differs";
      return false;
    }
  }
  detail = "3 repetitions, " + std::to_string(runs.mixed_seconds) + "s total";
  return runs.mixed_seconds < 300.0;
}

bool criterion_conservation(const AcceptanceRuns& runs, std::string& detail) {
  const auto run = metrics::load_run_dir(runs.mixed_dirs[0]);
  const auto conservation = metrics::audit_conservation(run, runs.cfg.ticks_per_day);
  if (!conservation.ok) {
    detail = conservation.violations.front();
    return false;
  }
  const auto cap = metrics::audit_held_cap(run.events, runs.cfg.max_held_orders);
  if (!cap.ok) {
    detail = cap.violations.front();
    return false;
  }
  const auto machine = metrics::audit_order_state_machine(run.events);
  if (!machine.ok) {
    detail = machine.violations.front();
    return false;
  }
  detail = std::to_string(run.events.size()) + " events audited";
  return true;
}

bool criterion_sole_trigger(const AcceptanceRuns& runs, std::string& detail) {
  const auto run = metrics::load_run_dir(runs.mixed_dirs[0]);
  const auto audit = metrics::audit_sole_trigger(run.events);
  if (!audit.ok) {
    detail = audit.violations.front();
    return false;
  }
  int updates = 0;
  for (const auto& e : run.events) {
    if (e.kind == EventKind::desire_update) ++updates;
  }
  detail = std::to_string(updates) + " desire updates, 0 violations";
  return true;
}

bool criterion_acceptance_gap(const AcceptanceRuns& runs, std::string& detail) {
  const auto run = metrics::load_run_dir(runs.duel_dir);
  const double llm = metrics::acceptance_rate(run, "llm");
  const double framework = metrics::acceptance_rate(run, "framework");
  const double gap = llm - framework;
  detail = "llm " + std::to_string(llm) + " vs framework " + std::to_string(framework) +
           " (gap " + std::to_string(gap) + "), " + std::to_string(runs.duel_seconds) + "s";
  return gap > 0.02 && runs.duel_seconds < 300.0;
}

bool criterion_dtw_ordering(const AcceptanceRuns& runs, std::string& detail) {
  // Report through the CLI path, then read the numbers back from it.
  const std::string report_dir = (runs.root / "report").string();
  if (cli::cmd_report({runs.mixed_dirs[0]}, report_dir) != cli::kExitOk) {
    detail = "cmd_report failed";
    return false;
  }
  std::ifstream in(fs::path(report_dir) / "consistency.csv");
  if (!in) {
    detail = "consistency.csv missing";
    return false;
  }
  std::map<std::string, double> means;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.rfind("mean,", 0) != 0) continue;
    std::istringstream row(line);
    std::string cell, policy, value;
    std::getline(row, cell, ',');
    std::getline(row, policy, ',');
    std::getline(row, value, ',');
    means[policy] = std::stod(value);
  }
  if (!means.count("framework") || !means.count("rl")) {
    detail = "per-type means missing from report";
    return false;
  }
  detail = "framework " + std::to_string(means["framework"]) + " vs rl " +
           std::to_string(means["rl"]);
  return means["framework"] < means["rl"];
}

// ---------------------------------------------------------------------------
// Criterion 10: emotion classifier properties
// ---------------------------------------------------------------------------

bool criterion_emotion(std::string& detail) {
  const EmotionConfig cfg;
  for (EmotionLabel l : all_emotion_labels()) {
    if (emotion::classify_emotion(cfg.centroids[static_cast<int>(l)], cfg) != l) {
      detail = "centroid of " + std::string(to_string(l)) + " misclassified";
      return false;
    }
  }
  Rng rng(1010);
  for (int i = 0; i < 1000; ++i) {
    const PadVector pad{rng.next_double() * 2.0 - 1.0, rng.next_double() * 2.0 - 1.0,
                        rng.next_double() * 2.0 - 1.0};
    EmotionLabel best = EmotionLabel::happiness;
    double best_d2 = 1e300;
    for (EmotionLabel l : all_emotion_labels()) {
      const double d2 = pad_distance2(pad, cfg.centroids[static_cast<int>(l)]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = l;
      }
    }
    if (emotion::classify_emotion(pad, cfg) != best) {
      detail = "nearest-centroid disagreement";
      return false;
    }
  }
  for (int i = 0; i < 10000; ++i) {
    AgentState prev, cur;
    prev.income = static_cast<Money>(rng.next_below(1000000)) - 500000;
    cur.income = static_cast<Money>(rng.next_below(1000000)) - 500000;
    prev.health = rng.next_double() * 300.0 - 100.0;
    cur.health = rng.next_double() * 300.0 - 100.0;
    cur.social_rank = rng.next_double() * 2.0 - 0.5;
    const auto pad = emotion::compute_pad(prev, cur, cfg);
    if (pad.pleasure < -1.0 || pad.pleasure > 1.0 || pad.arousal < -1.0 || pad.arousal > 1.0 ||
        pad.dominance < -1.0 || pad.dominance > 1.0) {
      detail = "PAD component out of [-1,1]";
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  Harness h;
  std::string detail;

  detail.clear();
  h.report(1, "reward-tilted distribution correctness", criterion_tilt(detail), detail);
  detail.clear();
  h.report(2, "DTW equals exhaustive path enumeration", criterion_dtw(detail), detail);
  detail.clear();
  h.report(3, "involution arithmetic and scale invariance", criterion_involution(detail), detail);
  detail.clear();
  h.report(4, "memory gates match the brute-force oracle", criterion_memory(detail), detail);

  AcceptanceRuns runs;
  if (!runs.prepare()) {
    for (int i = 5; i <= 9; ++i) {
      h.report(i, "scripted 30-day runs", false, runs.error);
    }
  } else {
    detail.clear();
    h.report(5, "mixed 30-day run is byte-identical across 3 repetitions",
             criterion_determinism(runs, detail), detail);
    detail.clear();
    h.report(6, "income conservation, held cap and order state machine",
             criterion_conservation(runs, detail), detail);
    detail.clear();
    h.report(7, "desire updates only on emotion transitions", criterion_sole_trigger(runs, detail),
             detail);
    detail.clear();
    h.report(8, "framework acceptance rate below income-greedy LLM",
             criterion_acceptance_gap(runs, detail), detail);
    detail.clear();
    h.report(9, "z-DTW(income, happiness): framework below RL",
             criterion_dtw_ordering(runs, detail), detail);
    runs.cleanup();
  }

  detail.clear();
  h.report(10, "emotion classifier properties", criterion_emotion(detail), detail);

  if (h.failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria failed\n", h.failures);
  }
  return h.failures;
}
