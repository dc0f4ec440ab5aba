#include "ecosim/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ecosim/toml.hpp"

namespace ecosim {

using nlohmann::json;

double EmotionConfig::dominance_for_rank(double rank) const {
  if (dominance_criteria.empty()) return 0.0;
  for (const auto& [threshold, value] : dominance_criteria) {
    if (rank < threshold) return value;
  }
  return dominance_criteria.back().second;
}

double ScenarioConfig::order_rate_at(Tick tick_in_day) const {
  if (!in_work_window(tick_in_day)) return 0.0;
  const double frac = static_cast<double>(tick_in_day) / static_cast<double>(ticks_per_day);
  double mult = 1.0;
  for (const auto& peak : order_peaks) {
    if (frac >= peak.start_frac && frac < peak.end_frac) mult *= peak.multiplier;
  }
  return order_rate * mult;
}

std::string ConfigValidation::joined() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i) out << "; ";
    out << errors[i];
  }
  return out.str();
}

namespace {

// Field reader that records unknown keys and type mismatches with full paths.
struct Reader {
  const json& j;
  std::string path;
  ConfigValidation& report;
  std::set<std::string> seen;

  void error(const std::string& key, const std::string& msg) {
    report.errors.push_back(path.empty() ? key + ": " + msg : path + "." + key + ": " + msg);
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen.insert(key);
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::runtime_error("expected number");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected integer");
        out = v.get<int>();
      } else if constexpr (std::is_same_v<T, Tick> || std::is_same_v<T, Money>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected integer");
        out = v.get<std::int64_t>();
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected integer");
        out = v.get<std::uint64_t>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::runtime_error("expected string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw std::runtime_error("expected array");
        out = v.get<std::vector<double>>();
      } else {
        static_assert(!sizeof(T*), "unhandled field type");
      }
    } catch (const std::exception& e) {
      error(key, e.what());
    }
  }

  // Returns the sub-object for a section key, or null json if absent.
  const json* section(const char* key) {
    seen.insert(key);
    if (!j.contains(key)) return nullptr;
    const json& v = j.at(key);
    if (!v.is_object()) {
      error(key, "expected table");
      return nullptr;
    }
    return &v;
  }

  void finish() {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!seen.count(it.key())) error(it.key(), "unknown field");
    }
  }
};

void read_emotion(const json& j, const std::string& path, EmotionConfig& cfg,
                  ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("k_p", cfg.k_p);
  r.read("k_a", cfg.k_a);
  r.read("pad_window_ticks", cfg.pad_window_ticks);
  r.seen.insert("dominance_criteria");
  if (j.contains("dominance_criteria")) {
    const json& dc = j.at("dominance_criteria");
    if (!dc.is_array()) {
      r.error("dominance_criteria", "expected array of [threshold, value] pairs");
    } else {
      cfg.dominance_criteria.clear();
      for (const auto& pair : dc) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
          r.error("dominance_criteria", "each entry must be [threshold, value]");
          break;
        }
        cfg.dominance_criteria.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
    }
  }
  r.seen.insert("centroids");
  if (j.contains("centroids")) {
    const json& c = j.at("centroids");
    if (!c.is_object()) {
      r.error("centroids", "expected table of label -> [p, a, d]");
    } else {
      for (auto it = c.begin(); it != c.end(); ++it) {
        auto label = parse_emotion_label(it.key());
        if (!label) {
          r.error("centroids." + it.key(), "unknown emotion label");
          continue;
        }
        const json& v = it.value();
        if (!v.is_array() || v.size() != 3) {
          r.error("centroids." + it.key(), "expected [pleasure, arousal, dominance]");
          continue;
        }
        cfg.centroids[static_cast<int>(*label)] =
            PadVector{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
      }
    }
  }
  r.finish();
}

void read_desire(const json& j, const std::string& path, DesireConfig& cfg,
                 ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("beta", cfg.beta);
  r.read("anomaly_threshold", cfg.anomaly_threshold);
  r.read("boost_increment", cfg.boost_increment);
  r.read("lookback_ticks", cfg.lookback_ticks);
  r.seen.insert("initial");
  if (j.contains("initial")) {
    const json& v = j.at("initial");
    if (!v.is_array() || v.size() != 3) {
      r.error("initial", "expected [w_income, w_health, w_rank]");
    } else {
      cfg.initial = DesireVector{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
  }
  auto read_scales = [&](const char* key, double& si, double& sh, double& sr) {
    r.seen.insert(key);
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 3) {
      r.error(key, "expected [income_scale, health_scale, rank_scale]");
      return;
    }
    si = v[0].get<double>();
    sh = v[1].get<double>();
    sr = v[2].get<double>();
  };
  read_scales("window_scales", cfg.window_scale_income, cfg.window_scale_health,
              cfg.window_scale_rank);
  read_scales("effect_scales", cfg.effect_scale_income, cfg.effect_scale_health,
              cfg.effect_scale_rank);
  r.finish();
}

void read_memory(const json& j, const std::string& path, MemoryConfig& cfg,
                 ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("embedding_dim", cfg.embedding_dim);
  r.read("k", cfg.k);
  r.read("min_similarity", cfg.min_similarity);
  r.read("min_importance", cfg.min_importance);
  r.read("ttl_ticks", cfg.ttl_ticks);
  r.read("default_importance", cfg.default_importance);
  r.finish();
}

void read_rule(const json& j, const std::string& path, RuleConfig& cfg,
               ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("health_floor", cfg.health_floor);
  r.read("yield_floor", cfg.yield_floor);
  r.finish();
}

void read_rl(const json& j, const std::string& path, RlConfig& cfg, ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("alpha", cfg.alpha);
  r.read("gamma", cfg.gamma);
  r.read("epsilon", cfg.epsilon);
  r.finish();
}

void read_llm(const json& j, const std::string& path, LlmConfig& cfg, ConfigValidation& report) {
  Reader r{j, path, report};
  r.read("base_url", cfg.base_url);
  r.read("model", cfg.model);
  r.read("temperature", cfg.temperature);
  r.read("timeout_ms", cfg.timeout_ms);
  r.read("max_retries", cfg.max_retries);
  r.read("fanout", cfg.fanout);
  r.finish();
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ScenarioConfig config_from_json(const json& j, ConfigValidation& report) {
  ScenarioConfig cfg;
  if (!j.is_object()) {
    report.errors.push_back("config root: expected object");
    return cfg;
  }
  Reader r{j, "", report};
  r.read("n_riders", cfg.n_riders);
  r.read("n_days", cfg.n_days);
  r.read("ticks_per_day", cfg.ticks_per_day);
  r.read("rng_seed", cfg.rng_seed);
  r.read("grid_width", cfg.grid_width);
  r.read("grid_height", cfg.grid_height);
  r.read("initial_speed", cfg.initial_speed);
  r.read("acceptance_tiers", cfg.acceptance_tiers);
  r.read("max_held_orders", cfg.max_held_orders);
  r.read("reoffer_cooldown_ticks", cfg.reoffer_cooldown_ticks);
  r.read("pending_expiry_ticks", cfg.pending_expiry_ticks);
  r.read("order_rate", cfg.order_rate);
  r.seen.insert("order_peaks");
  if (j.contains("order_peaks")) {
    const json& peaks = j.at("order_peaks");
    if (!peaks.is_array()) {
      r.error("order_peaks", "expected array of [start_frac, end_frac, multiplier]");
    } else {
      cfg.order_peaks.clear();
      for (const auto& p : peaks) {
        if (!p.is_array() || p.size() != 3) {
          r.error("order_peaks", "each entry must be [start_frac, end_frac, multiplier]");
          break;
        }
        cfg.order_peaks.push_back(
            RatePeak{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      }
    }
  }
  r.read("payout_base", cfg.payout_base);
  r.read("payout_per_unit", cfg.payout_per_unit);
  r.read("payout_noise", cfg.payout_noise);
  r.read("min_order_distance", cfg.min_order_distance);
  r.read("h_max", cfg.h_max);
  r.read("stamina_cost_per_unit", cfg.stamina_cost_per_unit);
  r.read("idle_stamina_cost", cfg.idle_stamina_cost);
  r.read("nap_threshold", cfg.nap_threshold);
  r.read("nap_ticks", cfg.nap_ticks);
  r.read("nap_restore_per_tick", cfg.nap_restore_per_tick);
  r.read("work_start_tick", cfg.work_start_tick);
  r.read("work_end_tick", cfg.work_end_tick);
  r.read("idle_decision_period", cfg.idle_decision_period);
  r.read("wander_radius", cfg.wander_radius);

  if (const json* s = r.section("emotion")) read_emotion(*s, "emotion", cfg.emotion, report);
  if (const json* s = r.section("desire")) read_desire(*s, "desire", cfg.desire, report);
  if (const json* s = r.section("memory")) read_memory(*s, "memory", cfg.memory, report);
  if (const json* s = r.section("rule")) read_rule(*s, "rule", cfg.rule, report);
  if (const json* s = r.section("rl")) read_rl(*s, "rl", cfg.rl, report);
  if (const json* s = r.section("llm")) read_llm(*s, "llm", cfg.llm, report);
  r.finish();
  return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["n_riders"] = cfg.n_riders;
  j["n_days"] = cfg.n_days;
  j["ticks_per_day"] = cfg.ticks_per_day;
  j["rng_seed"] = cfg.rng_seed;
  j["grid_width"] = cfg.grid_width;
  j["grid_height"] = cfg.grid_height;
  j["initial_speed"] = cfg.initial_speed;
  j["acceptance_tiers"] = cfg.acceptance_tiers;
  j["max_held_orders"] = cfg.max_held_orders;
  j["reoffer_cooldown_ticks"] = cfg.reoffer_cooldown_ticks;
  j["pending_expiry_ticks"] = cfg.pending_expiry_ticks;
  j["order_rate"] = cfg.order_rate;
  json peaks = json::array();
  for (const auto& p : cfg.order_peaks) {
    peaks.push_back(json::array({p.start_frac, p.end_frac, p.multiplier}));
  }
  j["order_peaks"] = peaks;
  j["payout_base"] = cfg.payout_base;
  j["payout_per_unit"] = cfg.payout_per_unit;
  j["payout_noise"] = cfg.payout_noise;
  j["min_order_distance"] = cfg.min_order_distance;
  j["h_max"] = cfg.h_max;
  j["stamina_cost_per_unit"] = cfg.stamina_cost_per_unit;
  j["idle_stamina_cost"] = cfg.idle_stamina_cost;
  j["nap_threshold"] = cfg.nap_threshold;
  j["nap_ticks"] = cfg.nap_ticks;
  j["nap_restore_per_tick"] = cfg.nap_restore_per_tick;
  j["work_start_tick"] = cfg.work_start_tick;
  j["work_end_tick"] = cfg.work_end_tick;
  j["idle_decision_period"] = cfg.idle_decision_period;
  j["wander_radius"] = cfg.wander_radius;

  json& e = j["emotion"];
  e["k_p"] = cfg.emotion.k_p;
  e["k_a"] = cfg.emotion.k_a;
  e["pad_window_ticks"] = cfg.emotion.pad_window_ticks;
  json dc = json::array();
  for (const auto& [t, v] : cfg.emotion.dominance_criteria) dc.push_back(json::array({t, v}));
  e["dominance_criteria"] = dc;
  json cents;
  for (EmotionLabel l : all_emotion_labels()) {
    const PadVector& p = cfg.emotion.centroids[static_cast<int>(l)];
    cents[std::string(to_string(l))] = json::array({p.pleasure, p.arousal, p.dominance});
  }
  e["centroids"] = cents;

  json& d = j["desire"];
  d["beta"] = cfg.desire.beta;
  d["anomaly_threshold"] = cfg.desire.anomaly_threshold;
  d["boost_increment"] = cfg.desire.boost_increment;
  d["lookback_ticks"] = cfg.desire.lookback_ticks;
  d["initial"] =
      json::array({cfg.desire.initial.w_income, cfg.desire.initial.w_health,
                   cfg.desire.initial.w_rank});
  d["window_scales"] = json::array({cfg.desire.window_scale_income, cfg.desire.window_scale_health,
                                    cfg.desire.window_scale_rank});
  d["effect_scales"] = json::array({cfg.desire.effect_scale_income, cfg.desire.effect_scale_health,
                                    cfg.desire.effect_scale_rank});

  json& m = j["memory"];
  m["embedding_dim"] = cfg.memory.embedding_dim;
  m["k"] = cfg.memory.k;
  m["min_similarity"] = cfg.memory.min_similarity;
  m["min_importance"] = cfg.memory.min_importance;
  m["ttl_ticks"] = cfg.memory.ttl_ticks;
  m["default_importance"] = cfg.memory.default_importance;

  json& ru = j["rule"];
  ru["health_floor"] = cfg.rule.health_floor;
  ru["yield_floor"] = cfg.rule.yield_floor;

  json& rl = j["rl"];
  rl["alpha"] = cfg.rl.alpha;
  rl["gamma"] = cfg.rl.gamma;
  rl["epsilon"] = cfg.rl.epsilon;

  json& llm = j["llm"];
  llm["base_url"] = cfg.llm.base_url;
  llm["model"] = cfg.llm.model;
  llm["temperature"] = cfg.llm.temperature;
  llm["timeout_ms"] = cfg.llm.timeout_ms;
  llm["max_retries"] = cfg.llm.max_retries;
  llm["fanout"] = cfg.llm.fanout;
  return j;
}

ConfigValidation validate_config(ScenarioConfig& cfg) {
  ConfigValidation v;
  auto err = [&](const std::string& path, const std::string& msg) {
    v.errors.push_back(path + ": " + msg);
  };

  // Derived defaults for sentinel fields.
  if (cfg.work_start_tick < 0) cfg.work_start_tick = cfg.ticks_per_day / 3;
  if (cfg.work_end_tick < 0) cfg.work_end_tick = cfg.ticks_per_day * 11 / 12;
  if (cfg.desire.lookback_ticks < 0) cfg.desire.lookback_ticks = cfg.ticks_per_day;
  if (cfg.memory.ttl_ticks < 0) cfg.memory.ttl_ticks = 3 * cfg.ticks_per_day;
  if (cfg.emotion.pad_window_ticks < 0) {
    cfg.emotion.pad_window_ticks = std::max<Tick>(1, cfg.ticks_per_day / 24);
  }

  if (cfg.n_riders < 0) err("n_riders", "must be >= 0");
  if (cfg.n_days < 1) err("n_days", "must be >= 1");
  if (cfg.ticks_per_day < 2) err("ticks_per_day", "must be >= 2");
  if (cfg.grid_width < 2 || cfg.grid_height < 2) err("grid", "dimensions must be >= 2");
  if (!(cfg.initial_speed > 0.0)) err("initial_speed", "must be > 0");
  if (cfg.acceptance_tiers.empty()) err("acceptance_tiers", "must not be empty");
  for (std::size_t i = 0; i < cfg.acceptance_tiers.size(); ++i) {
    const double t = cfg.acceptance_tiers[i];
    if (!(t > 0.0 && t <= 1.0)) {
      err("acceptance_tiers[" + std::to_string(i) + "]", "probability out of range (0, 1]");
    }
  }
  if (cfg.max_held_orders < 1) err("max_held_orders", "must be >= 1");
  if (cfg.reoffer_cooldown_ticks < 0) err("reoffer_cooldown_ticks", "must be >= 0");
  if (cfg.pending_expiry_ticks < 1) err("pending_expiry_ticks", "must be >= 1");
  if (cfg.order_rate < 0.0) err("order_rate", "must be >= 0");
  for (std::size_t i = 0; i < cfg.order_peaks.size(); ++i) {
    const auto& p = cfg.order_peaks[i];
    if (!(p.start_frac >= 0.0 && p.end_frac <= 1.0 && p.start_frac < p.end_frac)) {
      err("order_peaks[" + std::to_string(i) + "]", "window must satisfy 0 <= start < end <= 1");
    }
    if (p.multiplier < 0.0) {
      err("order_peaks[" + std::to_string(i) + "]", "multiplier must be >= 0");
    }
  }
  if (cfg.payout_base < 1) err("payout_base", "must be >= 1");
  if (cfg.payout_per_unit < 0.0) err("payout_per_unit", "must be >= 0");
  if (cfg.payout_noise < 0) err("payout_noise", "must be >= 0");
  if (cfg.min_order_distance < 1) err("min_order_distance", "must be >= 1");
  if (!(cfg.h_max > 0.0)) err("h_max", "must be > 0");
  if (cfg.stamina_cost_per_unit < 0.0) err("stamina_cost_per_unit", "must be >= 0");
  if (cfg.idle_stamina_cost < 0.0) err("idle_stamina_cost", "must be >= 0");
  if (cfg.nap_threshold < 0.0) err("nap_threshold", "must be >= 0");
  if (cfg.nap_ticks < 1) err("nap_ticks", "must be >= 1");
  if (cfg.nap_restore_per_tick < 0.0) err("nap_restore_per_tick", "must be >= 0");
  if (!(cfg.work_start_tick >= 0 && cfg.work_start_tick < cfg.work_end_tick &&
        cfg.work_end_tick <= cfg.ticks_per_day)) {
    err("work_start_tick/work_end_tick", "must satisfy 0 <= start < end <= ticks_per_day");
  }
  if (cfg.idle_decision_period < 1) err("idle_decision_period", "must be >= 1");
  if (cfg.wander_radius < 1) err("wander_radius", "must be >= 1");

  // emotion
  if (cfg.emotion.dominance_criteria.empty()) {
    err("emotion.dominance_criteria", "must not be empty");
  }
  double prev_threshold = 0.0;
  for (std::size_t i = 0; i < cfg.emotion.dominance_criteria.size(); ++i) {
    const auto& [t, val] = cfg.emotion.dominance_criteria[i];
    const std::string path = "emotion.dominance_criteria[" + std::to_string(i) + "]";
    if (!(t > 0.0 && t <= 1.0)) err(path, "threshold out of range (0, 1]");
    if (i > 0 && !(t > prev_threshold)) err(path, "thresholds must be strictly increasing");
    if (!(val >= -1.0 && val <= 1.0)) err(path, "dominance value out of range [-1, 1]");
    prev_threshold = t;
  }
  if (!finite(cfg.emotion.k_p) || !finite(cfg.emotion.k_a)) {
    err("emotion.k_p/k_a", "must be finite");
  }
  if (cfg.emotion.pad_window_ticks < 1) err("emotion.pad_window_ticks", "must be >= 1");

  // desire
  if (!(cfg.desire.beta > 0.0)) err("desire.beta", "must be > 0");
  if (!(cfg.desire.boost_increment > 0.0)) err("desire.boost_increment", "must be > 0");
  if (cfg.desire.lookback_ticks < 1) err("desire.lookback_ticks", "must be >= 1");
  if (cfg.desire.initial.w_income < 0.0 || cfg.desire.initial.w_health < 0.0 ||
      cfg.desire.initial.w_rank < 0.0 || !(cfg.desire.initial.sum() > 0.0)) {
    err("desire.initial", "weights must be >= 0 with positive sum");
  } else {
    cfg.desire.initial.normalize();
  }
  for (double s : {cfg.desire.window_scale_income, cfg.desire.window_scale_health,
                   cfg.desire.window_scale_rank, cfg.desire.effect_scale_income,
                   cfg.desire.effect_scale_health, cfg.desire.effect_scale_rank}) {
    if (!(s > 0.0)) {
      err("desire.window_scales/effect_scales", "normalizers must be > 0");
      break;
    }
  }

  // memory
  if (cfg.memory.embedding_dim < 1) err("memory.embedding_dim", "must be >= 1");
  if (cfg.memory.k < 1) err("memory.k", "must be >= 1");
  if (!(cfg.memory.min_similarity >= 0.0 && cfg.memory.min_similarity <= 1.0)) {
    err("memory.min_similarity", "must be in [0, 1]");
  }
  if (!(cfg.memory.min_importance >= 0.0 && cfg.memory.min_importance <= 1.0)) {
    err("memory.min_importance", "must be in [0, 1]");
  }
  if (cfg.memory.ttl_ticks < 1) err("memory.ttl_ticks", "must be >= 1");
  if (!(cfg.memory.default_importance >= 0.0 && cfg.memory.default_importance <= 1.0)) {
    err("memory.default_importance", "must be in [0, 1]");
  }

  // rule / rl / llm
  if (cfg.rule.yield_floor < 0.0) err("rule.yield_floor", "must be >= 0");
  if (!(cfg.rl.alpha > 0.0 && cfg.rl.alpha <= 1.0)) err("rl.alpha", "must be in (0, 1]");
  if (!(cfg.rl.gamma >= 0.0 && cfg.rl.gamma < 1.0)) err("rl.gamma", "must be in [0, 1)");
  if (!(cfg.rl.epsilon >= 0.0 && cfg.rl.epsilon <= 1.0)) err("rl.epsilon", "must be in [0, 1]");
  if (cfg.llm.timeout_ms < 1) err("llm.timeout_ms", "must be >= 1");
  if (cfg.llm.max_retries < 0) err("llm.max_retries", "must be >= 0");
  if (cfg.llm.fanout < 1) err("llm.fanout", "must be >= 1");

  return v;
}

ScenarioConfig load_scenario_file(const std::string& path, ConfigValidation& report) {
  json j;
  try {
    j = toml::parse_file(path);
  } catch (const std::exception& e) {
    report.errors.push_back(std::string("parse: ") + e.what());
    return ScenarioConfig{};
  }
  ScenarioConfig cfg = config_from_json(j, report);
  if (report.ok()) {
    ConfigValidation v = validate_config(cfg);
    report.errors.insert(report.errors.end(), v.errors.begin(), v.errors.end());
  }
  return cfg;
}

bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

}  // namespace ecosim
