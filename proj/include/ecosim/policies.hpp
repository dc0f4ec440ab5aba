#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecosim/backend.hpp"
#include "ecosim/config.hpp"
#include "ecosim/desire.hpp"
#include "ecosim/emotion.hpp"
#include "ecosim/memory.hpp"
#include "ecosim/prompt.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/types.hpp"

namespace ecosim::policies {

enum class PolicyType : int { rule = 0, rl, imitation, llm, framework };

std::string_view to_string(PolicyType t);
std::optional<PolicyType> parse_policy_type(std::string_view text);

// Everything a policy may look at when deciding. Effect estimates come from
// the world's deterministic one-step effect model, parallel to candidates.
struct DecisionContext {
  AgentState state;                   // current state; emotion is the last sampled label
  AgentState prev_sample_state;       // state at the previous emotion sample
  EmotionLabel prev_emotion = EmotionLabel::neutral;
  desire::StateDelta window_delta;    // look-back window state variation
  std::optional<Order> pending_order;
  std::int64_t pending_route = 0;     // rider->restaurant->consumer distance estimate
  std::vector<Order> held_orders;
  std::vector<Action> candidates;     // non-empty, in fixed action order
  std::vector<desire::StateDelta> effects;  // parallel to candidates
  Tick tick = 0;
  int agent_id = 0;
  int max_held = 3;
  double h_max = 100.0;
};

struct Decision {
  Action action = Action::wait;
  std::string rationale_text;  // empty for non-LLM policies
  double latency_ms = 0.0;     // diagnostic; never serialized into event logs
  std::string backend_error;   // set when a fallback path was taken
};

// ---------------------------------------------------------------------------
// Rule policy
// ---------------------------------------------------------------------------

// Accept iff health > health_floor AND payout per route unit >= yield_floor
// AND held < max. Deterministic.
Decision decide_rule(const DecisionContext& ctx, const RuleConfig& params);

// ---------------------------------------------------------------------------
// Tabular Q-learning policy
// ---------------------------------------------------------------------------

// Discretized state: health quintile x held count x payout bucket x rank tier.
struct QKey {
  int health_bucket = 0;  // 0..4
  int held = 0;           // 0..3
  int payout_bucket = 0;  // 0..4
  int rank_tier = 0;      // 0..2
  auto operator<=>(const QKey&) const = default;
};

QKey discretize(const DecisionContext& ctx);

class QTable {
public:
  double get(const QKey& key, Action a) const;
  void set(const QKey& key, Action a, double value);
  double max_over(const QKey& key, const std::vector<Action>& actions) const;
  std::size_t size() const { return table_.size(); }

private:
  std::map<QKey, std::array<double, kNumActions>> table_;
};

// One epsilon-greedy choice over the candidate set; ties resolve to the first
// candidate in fixed action order.
Decision decide_rl(const DecisionContext& ctx, const QTable& qtable, double explore_rate,
                   Rng& rng);

// Textbook one-step update:
//   Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
void rl_update(QTable& qtable, const QKey& prev_key, Action prev_action, double observed_reward,
               const QKey& next_key, const std::vector<Action>& next_candidates,
               const RlConfig& cfg);

// ---------------------------------------------------------------------------
// Imitation policy
// ---------------------------------------------------------------------------

// Majority action per discretized state, built from logged rule-agent runs.
class TraceTable {
public:
  void observe(const QKey& key, Action action);
  // Majority among candidates; ties resolve to fixed action order; nullopt
  // when the state was never seen (with these candidates).
  std::optional<Action> majority(const QKey& key, const std::vector<Action>& candidates) const;
  std::size_t size() const { return counts_.size(); }

private:
  std::map<QKey, std::array<int, kNumActions>> counts_;
};

Decision decide_imitation(const DecisionContext& ctx, const TraceTable& traces,
                          const RuleConfig& rule_params);

// ---------------------------------------------------------------------------
// LLM policy
// ---------------------------------------------------------------------------

// Extracts the token of the first `ACTION: <token>` line that names a
// candidate action; anything else is a parse failure.
std::optional<Action> parse_action_token(const std::string& response,
                                         const std::vector<Action>& candidates);

// Plain (non-desire-conditioned) prompting of the backend. One retry on parse
// failure, then decide_rule fallback.
Decision decide_llm(const DecisionContext& ctx, LlmBackend& backend,
                    const prompt::TemplateRegistry& templates, Tick ticks_per_day,
                    const RuleConfig& rule_params);

// ---------------------------------------------------------------------------
// Framework policy (emotion -> desire -> objective -> tilted decision)
// ---------------------------------------------------------------------------

struct FrameworkState {
  DesireVector desire;
  memory::MemoryStore store;
  explicit FrameworkState(const ScenarioConfig& cfg)
      : desire(cfg.desire.initial), store(cfg.memory.embedding_dim) {}
};

struct FrameworkOutcome {
  Decision decision;
  emotion::EmotionSample sample;  // PAD and label computed by the pipeline
  bool desire_changed = false;
  DesireVector desire;            // post-update
  Dimension focus = Dimension::income;
  Dimension prev_focus = Dimension::income;
  std::string prompt;             // rendered prompt (tests, fixture recording)
  std::vector<double> tilted;     // pi* over ctx.candidates
};

FrameworkOutcome decide_framework(const DecisionContext& ctx, const ScenarioConfig& cfg,
                                  FrameworkState& fw, LlmBackend& backend,
                                  const memory::Embedder& embedder,
                                  const prompt::TemplateRegistry& templates, Rng& rng);

// ---------------------------------------------------------------------------
// Polymorphic wrapper bound to each rider by the world
// ---------------------------------------------------------------------------

class RiderPolicy {
public:
  virtual ~RiderPolicy() = default;
  virtual PolicyType type() const = 0;
  virtual Decision decide(const DecisionContext& ctx, Rng& rng) = 0;
  // Framework-only introspection for event emission and persistence.
  virtual const FrameworkOutcome* last_outcome() const { return nullptr; }
  virtual memory::MemoryStore* memory_store() { return nullptr; }
  virtual bool uses_backend() const { return false; }
};

std::unique_ptr<RiderPolicy> make_policy(PolicyType type, const ScenarioConfig& cfg,
                                         LlmBackend* backend,
                                         const prompt::TemplateRegistry* templates,
                                         const TraceTable* traces);

}  // namespace ecosim::policies
