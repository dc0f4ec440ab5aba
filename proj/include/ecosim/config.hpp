#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ecosim/types.hpp"

namespace ecosim {

// ---------------------------------------------------------------------------
// Per-module config sections
// ---------------------------------------------------------------------------

// PAD computation and classification parameters ([emotion] section).
struct EmotionConfig {
  double k_p = 0.03;  // pleasure gain per currency unit of income delta
  double k_a = 0.02;  // arousal gain per stamina unit of health delta

  // PAD deltas are measured against the state this many ticks back, so the
  // emotion signal does not depend on how often an agent happens to decide.
  Tick pad_window_ticks = -1;  // -1 -> one hour

  // Ordered (upper rank threshold, dominance) pairs; lookup returns the value
  // of the first pair whose threshold exceeds the rank, else the last value.
  std::vector<std::pair<double, double>> dominance_criteria = {
      {1.0 / 3.0, -0.5}, {2.0 / 3.0, 0.0}, {1.0, 0.5}};

  // Editable defaults in conventional PAD-literature placements, indexed by
  // EmotionLabel. Not ground truth; scenario files may override per label.
  std::array<PadVector, kNumEmotionLabels> centroids = {{
      {0.81, 0.51, 0.46},    // happiness
      {-0.51, 0.59, 0.25},   // anger
      {-0.60, 0.35, 0.11},   // disgust
      {0.40, 0.67, -0.13},   // surprise
      {-0.64, 0.60, -0.43},  // fear
      {-0.63, -0.27, -0.33}, // sadness
      {0.0, 0.0, 0.0},       // neutral
  }};

  double dominance_for_rank(double rank) const;
};

// Desire update, objective optimization and decision tilt ([desire] section).
struct DesireConfig {
  double beta = 1.0;               // Eq.-style alignment tuning parameter
  double anomaly_threshold = -1.0; // on the scale-normalized windowed delta
  double boost_increment = 0.2;    // anomalous weight <- max(weights) + this
  Tick lookback_ticks = -1;        // -1 -> one day
  DesireVector initial{0.5, 0.25, 0.25};  // income-primary start

  // Typical magnitudes used to normalize deltas. window_* scale the
  // look-back-window deltas fed to the anomaly detector; effect_* scale the
  // one-step per-action effect estimates fed to the reward tilt.
  double window_scale_income = 100.0;
  double window_scale_health = 18.0;
  double window_scale_rank = 0.15;
  double effect_scale_income = 30.0;
  double effect_scale_health = 6.0;
  double effect_scale_rank = 0.1;
};

// Episodic memory gates ([memory] section).
struct MemoryConfig {
  int embedding_dim = 64;
  int k = 3;                    // max retrieved records
  double min_similarity = 0.4;
  double min_importance = 0.3;
  Tick ttl_ticks = -1;          // -1 -> three days
  double default_importance = 0.5;  // fallback when the evaluator reply has no number
};

// Rule policy thresholds ([rule] section).
struct RuleConfig {
  double health_floor = 20.0;
  double yield_floor = 0.08;  // min payout per route unit
};

// Tabular Q-learning parameters ([rl] section).
struct RlConfig {
  double alpha = 0.2;
  double gamma = 0.9;
  double epsilon = 0.1;
};

// Live backend parameters ([llm] section). The API key comes from the
// ECOSIM_API_KEY environment variable, never from config or flags.
struct LlmConfig {
  std::string base_url = "http://localhost:8000";
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int timeout_ms = 30000;
  int max_retries = 2;
  int fanout = 4;  // max concurrent backend calls within one tick
};

// A [start_frac, end_frac) window of the day with an order-rate multiplier.
struct RatePeak {
  double start_frac = 0.0;
  double end_frac = 0.0;
  double multiplier = 1.0;
};

// ---------------------------------------------------------------------------
// ScenarioConfig
// ---------------------------------------------------------------------------

struct ScenarioConfig {
  // Population and horizon
  int n_riders = 6;
  int n_days = 30;
  Tick ticks_per_day = 1440;  // minute resolution
  std::uint64_t rng_seed = 42;

  // World geometry and movement
  int grid_width = 200;
  int grid_height = 200;
  double initial_speed = 80.0;  // grid units per hour

  // Platform
  std::vector<double> acceptance_tiers = {0.30, 0.60, 0.90};
  int max_held_orders = 3;
  Tick reoffer_cooldown_ticks = 60;
  Tick pending_expiry_ticks = 120;  // pending orders expire this long after creation

  // Order generation (bookers)
  double order_rate = 0.05;  // base spawn probability per tick inside the work window
  std::vector<RatePeak> order_peaks = {
      {11.0 / 24.0, 13.0 / 24.0, 3.0},   // lunch
      {17.0 / 24.0, 20.0 / 24.0, 3.0}};  // dinner
  Money payout_base = 10;
  double payout_per_unit = 0.15;
  Money payout_noise = 6;  // uniform integer noise in [0, payout_noise]
  int min_order_distance = 10;

  // Stamina
  double h_max = 100.0;
  double stamina_cost_per_unit = 0.06;   // per grid unit moved
  double idle_stamina_cost = 0.005;      // per idle tick
  double nap_threshold = 25.0;           // go_sleep becomes a candidate below this
  Tick nap_ticks = 60;
  double nap_restore_per_tick = 0.25;

  // Day schedule (ticks within the day); -1 -> derived from ticks_per_day
  Tick work_start_tick = -1;  // default: ticks_per_day / 3   (08:00)
  Tick work_end_tick = -1;    // default: ticks_per_day * 11 / 12 (22:00)

  // Decision cadence
  Tick idle_decision_period = 30;
  int wander_radius = 20;

  // Sections
  EmotionConfig emotion;
  DesireConfig desire;
  MemoryConfig memory;
  RuleConfig rule;
  RlConfig rl;
  LlmConfig llm;

  Tick total_ticks() const { return static_cast<Tick>(n_days) * ticks_per_day; }
  double speed_per_tick() const {
    return initial_speed * 24.0 / static_cast<double>(ticks_per_day);
  }
  double order_rate_at(Tick tick_in_day) const;
  bool in_work_window(Tick tick_in_day) const {
    return tick_in_day >= work_start_tick && tick_in_day < work_end_tick;
  }
};

// ---------------------------------------------------------------------------
// Validation and (de)serialization
// ---------------------------------------------------------------------------

struct ConfigValidation {
  std::vector<std::string> errors;  // "field.path: message"
  bool ok() const { return errors.empty(); }
  std::string joined() const;
};

// Fills derived defaults (work window, look-back, ttl) for fields left at
// their -1 sentinels, then checks every invariant. On success the returned
// report is empty and cfg is runnable.
ConfigValidation validate_config(ScenarioConfig& cfg);

// Strict field-by-field load: unknown keys are validation errors. Absent
// fields keep their defaults.
ScenarioConfig config_from_json(const nlohmann::json& j, ConfigValidation& report);

nlohmann::json config_to_json(const ScenarioConfig& cfg);

// Loads a TOML or JSON scenario file, fills defaults, validates.
ScenarioConfig load_scenario_file(const std::string& path, ConfigValidation& report);

// Semantic equality over every field (exact; used by round-trip checks).
bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace ecosim
