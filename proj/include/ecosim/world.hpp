#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecosim/backend.hpp"
#include "ecosim/config.hpp"
#include "ecosim/events.hpp"
#include "ecosim/policies.hpp"
#include "ecosim/types.hpp"

namespace ecosim::world {

struct Rider {
  int id = 0;
  policies::PolicyType policy_type = policies::PolicyType::rule;
  std::unique_ptr<policies::RiderPolicy> policy;

  GridPos pos;
  GridPos workplace;
  GridPos idle_target;
  double health = 100.0;
  Money income = 0;
  double social_rank = 0.5;
  double tier = 0.9;  // offer-prioritization probability drawn at creation
  EmotionLabel emotion = EmotionLabel::neutral;  // label at the last emotion sample
  std::deque<AgentState> history;  // per-tick state trace for look-back deltas
  std::deque<std::int64_t> held;   // order ids, acceptance order

  double move_budget = 0.0;
  std::int64_t distance_total = 0;

  enum class SleepState { awake, night, nap, collapse };
  SleepState sleep = SleepState::night;  // riders start the run asleep
  Tick nap_until = 0;
  Tick next_idle_decision = 0;

  // per-day counters
  Money day_start_income = 0;
  std::int64_t day_start_distance = 0;
  int offers_day = 0;
  int accepts_day = 0;
  int delivered_day = 0;
  std::vector<EmotionLabel> samples_day;

  bool awake() const { return sleep == SleepState::awake; }
};

// Invoked after every applied decision; used to harvest imitation traces.
using DecisionTap =
    std::function<void(const policies::DecisionContext&, const policies::Decision&)>;

// The O2O delivery ecosystem: grid, platform dispatcher, NPC bookers/makers,
// rider lifecycle. One step() call advances a single tick; the step is
// logically single-threaded and deterministic (policy backend calls within a
// tick may fan out to threads for remote backends, results are applied in
// agent-id order).
class World {
public:
  World(const ScenarioConfig& cfg, std::vector<policies::PolicyType> assignment,
        LlmBackend* backend, const prompt::TemplateRegistry* templates, EventSink* sink,
        const policies::TraceTable* traces = nullptr);

  void step();
  // Runs the full horizon including day rollovers and final summaries.
  void run_all();

  Tick tick() const { return tick_; }
  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<DailyRow>& daily_rows() const { return daily_rows_; }
  const Rider& rider(int id) const { return riders_.at(static_cast<std::size_t>(id)); }
  std::size_t rider_count() const { return riders_.size(); }
  const std::map<std::int64_t, Order>& orders() const { return orders_; }

  // Deterministic one-step effect projection (dI, dH, dSR) for an action.
  desire::StateDelta effect_estimate(const Rider& rider, Action action,
                                     const Order* pending) const;

  void set_decision_tap(DecisionTap tap) { tap_ = std::move(tap); }
  // When set, per-agent memory snapshots are written here at day rollover.
  void set_memory_dir(std::string dir) { memory_dir_ = std::move(dir); }

private:
  struct PendingDecision {
    int rider_id = 0;
    std::optional<std::int64_t> offer_order;
    policies::DecisionContext ctx;
    policies::Decision decision;
  };

  void rollover(int completed_day);
  void spawn_orders(Tick tick_in_day);
  void expire_pending();
  std::map<int, std::int64_t> assign_offers(Tick tick_in_day);
  std::vector<PendingDecision> collect_decisions(const std::map<int, std::int64_t>& offers,
                                                 Tick tick_in_day);
  void dispatch(std::vector<PendingDecision>& pending);
  void apply_decision(PendingDecision& pd);
  void move_rider(Rider& rider, Tick tick_in_day);
  void handle_arrival(Rider& rider, Tick tick_in_day);
  void go_to_sleep(Rider& rider, Rider::SleepState state);
  void emit(Tick tick, int agent, EventKind kind, nlohmann::json payload);
  // Orders the tick's buffered events by (tick, agent, emission order) and
  // hands them to the sink with their final sequence numbers.
  void flush_events();
  void check_invariants(const Rider& rider) const;

  policies::DecisionContext build_context(const Rider& rider, const Order* pending,
                                          std::vector<Action> candidates);
  desire::StateDelta window_delta(const Rider& rider, const AgentState& cur) const;
  // State of the rider `at` the given tick (youngest trace entry not newer).
  const AgentState& state_at(const Rider& rider, Tick at) const;
  AgentState current_state(const Rider& rider) const;
  void record_tick_state(Rider& rider);
  double percentile_of(Money value, int self_id) const;
  void record_sample(Rider& rider, const emotion::EmotionSample& sample);

  ScenarioConfig cfg_;
  LlmBackend* backend_ = nullptr;
  EventSink* sink_ = nullptr;
  std::vector<Rider> riders_;
  std::map<std::int64_t, Order> orders_;
  std::vector<std::int64_t> pending_;  // order ids awaiting assignment, id order
  std::map<std::pair<std::int64_t, int>, Tick> last_offer_;  // (order, rider) -> tick
  Tick tick_ = 0;
  std::int64_t next_order_id_ = 1;
  std::int64_t next_seq_ = 0;
  std::vector<SimEvent> event_buffer_;  // current tick, pre-sort
  std::vector<DailyRow> daily_rows_;
  DecisionTap tap_;
  std::string memory_dir_;
};

struct RunResult {
  std::vector<DailyRow> daily;
  Tick ticks = 0;
};

// Builds a majority-action trace table from an all-rule shadow run of the
// same scenario (the imitation policy's training data).
policies::TraceTable build_rule_traces(const ScenarioConfig& cfg);

// Drives a full simulation: constructs the world (building imitation traces
// if the assignment needs them), runs every day, returns the daily table.
RunResult run(const ScenarioConfig& cfg, const std::vector<policies::PolicyType>& assignment,
              LlmBackend* backend, const prompt::TemplateRegistry* templates, EventSink* sink,
              const std::string& memory_dir = "");

}  // namespace ecosim::world
