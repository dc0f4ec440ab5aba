#include "ecosim/policies.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ecosim::policies {

std::string_view to_string(PolicyType t) {
  switch (t) {
    case PolicyType::rule: return "rule";
    case PolicyType::rl: return "rl";
    case PolicyType::imitation: return "imitation";
    case PolicyType::llm: return "llm";
    case PolicyType::framework: return "framework";
  }
  return "rule";
}

std::optional<PolicyType> parse_policy_type(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(PolicyType::framework); ++i) {
    PolicyType t = static_cast<PolicyType>(i);
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

namespace {

bool has_candidate(const DecisionContext& ctx, Action a) {
  return std::find(ctx.candidates.begin(), ctx.candidates.end(), a) != ctx.candidates.end();
}

Action first_candidate(const DecisionContext& ctx) { return ctx.candidates.at(0); }

}  // namespace

// ---------------------------------------------------------------------------
// Rule policy
// ---------------------------------------------------------------------------

Decision decide_rule(const DecisionContext& ctx, const RuleConfig& params) {
  Decision d;
  if (ctx.pending_order) {
    const int held = static_cast<int>(ctx.held_orders.size());
    if (held >= ctx.max_held) {
      // The platform should never offer at the cap; keep delivering if it does.
      d.action = has_candidate(ctx, Action::continue_delivery) ? Action::continue_delivery
                                                               : Action::reject;
      return d;
    }
    const double route = static_cast<double>(std::max<std::int64_t>(1, ctx.pending_route));
    const double yield = static_cast<double>(ctx.pending_order->payout) / route;
    const bool take = ctx.state.health > params.health_floor && yield >= params.yield_floor;
    d.action = take && has_candidate(ctx, Action::accept) ? Action::accept : Action::reject;
    return d;
  }
  if (has_candidate(ctx, Action::go_sleep) &&
      (ctx.state.health <= 0.0 || ctx.state.health < params.health_floor)) {
    d.action = Action::go_sleep;
    return d;
  }
  d.action = has_candidate(ctx, Action::wait) ? Action::wait : first_candidate(ctx);
  return d;
}

// ---------------------------------------------------------------------------
// Q-learning policy
// ---------------------------------------------------------------------------

QKey discretize(const DecisionContext& ctx) {
  QKey key;
  const double h_frac = ctx.h_max > 0.0 ? ctx.state.health / ctx.h_max : 0.0;
  key.health_bucket = std::clamp(static_cast<int>(h_frac * 5.0), 0, 4);
  key.held = std::clamp(static_cast<int>(ctx.held_orders.size()), 0, 3);
  const Money payout = ctx.pending_order ? ctx.pending_order->payout : 0;
  key.payout_bucket = std::clamp(static_cast<int>(payout / 15), 0, 4);
  const double r = ctx.state.social_rank;
  key.rank_tier = r < 1.0 / 3.0 ? 0 : (r < 2.0 / 3.0 ? 1 : 2);
  return key;
}

double QTable::get(const QKey& key, Action a) const {
  auto it = table_.find(key);
  if (it == table_.end()) return 0.0;
  return it->second[static_cast<int>(a)];
}

void QTable::set(const QKey& key, Action a, double value) {
  auto it = table_.find(key);
  if (it == table_.end()) it = table_.emplace(key, std::array<double, kNumActions>{}).first;
  it->second[static_cast<int>(a)] = value;
}

double QTable::max_over(const QKey& key, const std::vector<Action>& actions) const {
  double best = -std::numeric_limits<double>::infinity();
  for (Action a : actions) best = std::max(best, get(key, a));
  return actions.empty() ? 0.0 : best;
}

Decision decide_rl(const DecisionContext& ctx, const QTable& qtable, double explore_rate,
                   Rng& rng) {
  Decision d;
  if (explore_rate > 0.0 && rng.chance(explore_rate)) {
    d.action = ctx.candidates[rng.next_below(ctx.candidates.size())];
    return d;
  }
  const QKey key = discretize(ctx);
  Action best = ctx.candidates.front();
  double best_q = qtable.get(key, best);
  for (std::size_t i = 1; i < ctx.candidates.size(); ++i) {
    const double q = qtable.get(key, ctx.candidates[i]);
    if (q > best_q) {  // strict: ties keep the earlier candidate
      best_q = q;
      best = ctx.candidates[i];
    }
  }
  d.action = best;
  return d;
}

void rl_update(QTable& qtable, const QKey& prev_key, Action prev_action, double observed_reward,
               const QKey& next_key, const std::vector<Action>& next_candidates,
               const RlConfig& cfg) {
  const double q_old = qtable.get(prev_key, prev_action);
  const double max_next = next_candidates.empty() ? 0.0 : qtable.max_over(next_key, next_candidates);
  const double target = observed_reward + cfg.gamma * max_next;
  qtable.set(prev_key, prev_action, q_old + cfg.alpha * (target - q_old));
}

// ---------------------------------------------------------------------------
// Imitation policy
// ---------------------------------------------------------------------------

void TraceTable::observe(const QKey& key, Action action) {
  auto it = counts_.find(key);
  if (it == counts_.end()) it = counts_.emplace(key, std::array<int, kNumActions>{}).first;
  it->second[static_cast<int>(action)] += 1;
}

std::optional<Action> TraceTable::majority(const QKey& key,
                                           const std::vector<Action>& candidates) const {
  auto it = counts_.find(key);
  if (it == counts_.end()) return std::nullopt;
  std::optional<Action> best;
  int best_count = 0;
  for (Action a : candidates) {  // candidates are in fixed action order
    const int c = it->second[static_cast<int>(a)];
    if (c > best_count) {
      best_count = c;
      best = a;
    }
  }
  return best_count > 0 ? best : std::nullopt;
}

Decision decide_imitation(const DecisionContext& ctx, const TraceTable& traces,
                          const RuleConfig& rule_params) {
  if (auto action = traces.majority(discretize(ctx), ctx.candidates)) {
    Decision d;
    d.action = *action;
    return d;
  }
  return decide_rule(ctx, rule_params);
}

// ---------------------------------------------------------------------------
// LLM policy
// ---------------------------------------------------------------------------

std::optional<Action> parse_action_token(const std::string& response,
                                         const std::vector<Action>& candidates) {
  std::istringstream lines(response);
  std::string line;
  while (std::getline(lines, line)) {
    auto pos = line.find("ACTION:");
    if (pos == std::string::npos) continue;
    std::string token = line.substr(pos + 7);
    const auto begin = token.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    auto end = begin;
    while (end < token.size() &&
           (std::isalnum(static_cast<unsigned char>(token[end])) || token[end] == '_')) {
      ++end;
    }
    std::string word = token.substr(begin, end - begin);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    auto action = parse_action(word);
    if (!action) continue;
    if (std::find(candidates.begin(), candidates.end(), *action) == candidates.end()) {
      return std::nullopt;  // token named a non-candidate: parse failure
    }
    return action;
  }
  return std::nullopt;
}

Decision decide_llm(const DecisionContext& ctx, LlmBackend& backend,
                    const prompt::TemplateRegistry& templates, Tick ticks_per_day,
                    const RuleConfig& rule_params) {
  const std::string prompt_text =
      prompt::render_plain_prompt(ctx.state, ctx.pending_order, ctx.candidates, ticks_per_day,
                                  templates);
  std::string transport_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    BackendReply reply = backend.respond(prompt_text);
    if (!reply.ok) {
      transport_error = reply.error;
      break;  // the backend already retried transport internally
    }
    if (auto action = parse_action_token(reply.text, ctx.candidates)) {
      Decision d;
      d.action = *action;
      d.rationale_text = reply.text;
      return d;
    }
  }
  Decision d = decide_rule(ctx, rule_params);
  d.rationale_text = transport_error.empty() ? "llm-parse-fallback" : "llm-transport-fallback";
  d.backend_error = transport_error;
  return d;
}

// ---------------------------------------------------------------------------
// Framework policy
// ---------------------------------------------------------------------------

namespace {

std::string snippet_of(const memory::MemoryRecord& r, Tick ticks_per_day) {
  std::ostringstream out;
  out << "[day " << (r.created_tick / ticks_per_day + 1) << "] " << r.problem_text << " -> "
      << r.decision_text;
  if (!r.rationale_text.empty()) {
    std::string rationale = r.rationale_text;
    std::replace(rationale.begin(), rationale.end(), '\n', ' ');
    if (rationale.size() > 120) rationale = rationale.substr(0, 120) + "...";
    out << " (" << rationale << ")";
  }
  return out.str();
}

std::size_t index_of(const std::vector<Action>& actions, Action a) {
  return static_cast<std::size_t>(
      std::find(actions.begin(), actions.end(), a) - actions.begin());
}

}  // namespace

FrameworkOutcome decide_framework(const DecisionContext& ctx, const ScenarioConfig& cfg,
                                  FrameworkState& fw, LlmBackend& backend,
                                  const memory::Embedder& embedder,
                                  const prompt::TemplateRegistry& templates, Rng& rng) {
  FrameworkOutcome out;

  // Step 1: state perception.
  out.sample = emotion::sample_emotion(ctx.prev_sample_state, ctx.state, cfg.emotion);
  AgentState cur = ctx.state;
  cur.emotion = out.sample.label;

  // Step 2: L1 desire update (emotion transition is the sole trigger) and
  // L2 objective optimization.
  const DesireVector prev_desire = fw.desire;
  out.prev_focus = prev_desire.focus();
  fw.desire = desire::update_desire(ctx.prev_emotion, out.sample.label, ctx.window_delta,
                                    prev_desire, cfg.desire);
  out.desire = fw.desire;
  out.desire_changed = fw.desire.w_income != prev_desire.w_income ||
                       fw.desire.w_health != prev_desire.w_health ||
                       fw.desire.w_rank != prev_desire.w_rank;
  const desire::ObjectivePlan plan =
      desire::optimize_objective(fw.desire, ctx.window_delta, cfg.desire);
  out.focus = plan.focus_dimension;

  // Memory retrieval through the three gates.
  std::ostringstream problem;
  problem << prompt::describe_state(cur, cfg.ticks_per_day) << " | "
          << prompt::describe_order(ctx.pending_order, cur);
  const std::string problem_text = problem.str();
  const std::vector<double> query = embedder.embed(problem_text);
  memory::RetrievalQuery rq;
  rq.query_embedding = query;
  rq.now_tick = ctx.tick;
  rq.k = cfg.memory.k;
  rq.min_similarity = cfg.memory.min_similarity;
  rq.min_importance = cfg.memory.min_importance;
  rq.ttl_ticks = cfg.memory.ttl_ticks;
  std::vector<std::string> snippets;
  for (const auto& r : fw.store.retrieve(rq)) {
    snippets.push_back(snippet_of(r, cfg.ticks_per_day));
  }

  // Step 3: prompt the frozen model and tilt the candidate distribution by
  // the desire-weighted effect rewards.
  out.prompt = prompt::render_prompt(plan, cur, snippets, ctx.pending_order, ctx.candidates,
                                     cfg.ticks_per_day, templates);
  BackendReply reply = backend.respond(out.prompt);

  desire::RewardSpec spec;
  spec.a_income = plan.reward_weights[0];
  spec.a_health = plan.reward_weights[1];
  spec.a_rank = plan.reward_weights[2];
  spec.s_income = cfg.desire.effect_scale_income;
  spec.s_health = cfg.desire.effect_scale_health;
  spec.s_rank = cfg.desire.effect_scale_rank;

  desire::ActionDistribution dist;
  dist.actions = ctx.candidates;
  dist.base_probs.assign(ctx.candidates.size(), 1.0 / ctx.candidates.size());
  dist.rewards.reserve(ctx.candidates.size());
  for (const auto& effect : ctx.effects) dist.rewards.push_back(desire::reward(effect, spec));
  dist.beta = cfg.desire.beta;
  out.tilted = desire::tilt_distribution(dist);

  std::size_t tilt_argmax = 0;
  for (std::size_t i = 1; i < out.tilted.size(); ++i) {
    if (out.tilted[i] > out.tilted[tilt_argmax]) tilt_argmax = i;
  }

  Decision d;
  std::optional<Action> parsed;
  if (reply.ok) parsed = parse_action_token(reply.text, ctx.candidates);

  if (parsed) {
    const std::size_t parsed_idx = index_of(ctx.candidates, *parsed);
    if (parsed_idx == tilt_argmax) {
      d.action = *parsed;
    } else {
      // Eq.-3-style arbitration: the tilted masses of the two contenders,
      // renormalized, decide which one acts.
      const double m_parsed = out.tilted[parsed_idx];
      const double m_tilt = out.tilted[tilt_argmax];
      const double p_parsed = m_parsed / (m_parsed + m_tilt);
      d.action = rng.next_double() < p_parsed ? *parsed : ctx.candidates[tilt_argmax];
    }
    d.rationale_text = reply.text;
  } else {
    // Backend down or unparseable: act from the tilted distribution alone.
    const double u = rng.next_double();
    double cum = 0.0;
    d.action = ctx.candidates[tilt_argmax];
    for (std::size_t i = 0; i < out.tilted.size(); ++i) {
      cum += out.tilted[i];
      if (u < cum) {
        d.action = ctx.candidates[i];
        break;
      }
    }
    d.rationale_text = reply.ok ? "parse-fallback" : "backend-fallback";
    d.backend_error = reply.error;
  }

  // Persist the episode: problem, decision, rationale, scored importance.
  memory::MemoryRecord record;
  record.created_tick = ctx.tick;
  record.problem_text = problem_text;
  record.decision_text = std::string(to_string(d.action));
  record.rationale_text = d.rationale_text;
  record.embedding = query;
  record.emotion_at_write = out.sample.label;
  const memory::ImportanceScore score = memory::score_importance(
      d.rationale_text, backend, cfg.memory,
      prompt::render_importance_prompt(d.rationale_text, templates));
  record.importance = score.value;
  if (!score.ok && d.backend_error.empty()) d.backend_error = score.error;
  fw.store.write(std::move(record));

  out.decision = std::move(d);
  return out;
}

// ---------------------------------------------------------------------------
// RiderPolicy wrappers
// ---------------------------------------------------------------------------

namespace {

class RulePolicy final : public RiderPolicy {
public:
  explicit RulePolicy(const ScenarioConfig& cfg) : params_(cfg.rule) {}
  PolicyType type() const override { return PolicyType::rule; }
  Decision decide(const DecisionContext& ctx, Rng&) override {
    return decide_rule(ctx, params_);
  }

private:
  RuleConfig params_;
};

class RlPolicy final : public RiderPolicy {
public:
  explicit RlPolicy(const ScenarioConfig& cfg) : cfg_(cfg.rl) {
    spec_.a_income = spec_.a_health = spec_.a_rank = 1.0 / 3.0;  // equal weights
    spec_.s_income = cfg.desire.effect_scale_income;
    spec_.s_health = cfg.desire.effect_scale_health;
    spec_.s_rank = cfg.desire.effect_scale_rank;
  }

  PolicyType type() const override { return PolicyType::rl; }

  Decision decide(const DecisionContext& ctx, Rng& rng) override {
    const QKey key = discretize(ctx);
    if (has_last_) {
      desire::StateDelta delta;
      delta.d_income = static_cast<double>(ctx.state.income - last_state_.income);
      delta.d_health = ctx.state.health - last_state_.health;
      delta.d_rank = ctx.state.social_rank - last_state_.social_rank;
      rl_update(qtable_, last_key_, last_action_, desire::reward(delta, spec_), key,
                ctx.candidates, cfg_);
    }
    Decision d = decide_rl(ctx, qtable_, cfg_.epsilon, rng);
    last_key_ = key;
    last_action_ = d.action;
    last_state_ = ctx.state;
    has_last_ = true;
    return d;
  }

private:
  RlConfig cfg_;
  desire::RewardSpec spec_;
  QTable qtable_;
  bool has_last_ = false;
  QKey last_key_;
  Action last_action_ = Action::wait;
  AgentState last_state_;
};

class ImitationPolicy final : public RiderPolicy {
public:
  ImitationPolicy(const ScenarioConfig& cfg, const TraceTable* traces)
      : params_(cfg.rule), traces_(traces ? *traces : TraceTable{}) {}
  PolicyType type() const override { return PolicyType::imitation; }
  Decision decide(const DecisionContext& ctx, Rng&) override {
    return decide_imitation(ctx, traces_, params_);
  }

private:
  RuleConfig params_;
  TraceTable traces_;
};

class LlmPolicy final : public RiderPolicy {
public:
  LlmPolicy(const ScenarioConfig& cfg, LlmBackend* backend,
            const prompt::TemplateRegistry* templates)
      : ticks_per_day_(cfg.ticks_per_day), params_(cfg.rule), backend_(backend),
        templates_(templates) {}
  PolicyType type() const override { return PolicyType::llm; }
  bool uses_backend() const override { return true; }
  Decision decide(const DecisionContext& ctx, Rng&) override {
    return decide_llm(ctx, *backend_, *templates_, ticks_per_day_, params_);
  }

private:
  Tick ticks_per_day_;
  RuleConfig params_;
  LlmBackend* backend_;
  const prompt::TemplateRegistry* templates_;
};

class FrameworkPolicy final : public RiderPolicy {
public:
  FrameworkPolicy(const ScenarioConfig& cfg, LlmBackend* backend,
                  const prompt::TemplateRegistry* templates)
      : cfg_(cfg), backend_(backend), templates_(templates),
        embedder_(cfg.memory.embedding_dim), fw_(cfg) {
    outcome_.desire = fw_.desire;  // meaningful before the first decision
    outcome_.focus = fw_.desire.focus();
    outcome_.prev_focus = outcome_.focus;
  }

  PolicyType type() const override { return PolicyType::framework; }
  bool uses_backend() const override { return true; }
  const FrameworkOutcome* last_outcome() const override { return &outcome_; }
  memory::MemoryStore* memory_store() override { return &fw_.store; }

  Decision decide(const DecisionContext& ctx, Rng& rng) override {
    outcome_ = decide_framework(ctx, cfg_, fw_, *backend_, embedder_, *templates_, rng);
    return outcome_.decision;
  }

private:
  const ScenarioConfig& cfg_;
  LlmBackend* backend_;
  const prompt::TemplateRegistry* templates_;
  memory::HashEmbedder embedder_;
  FrameworkState fw_;
  FrameworkOutcome outcome_;
};

}  // namespace

std::unique_ptr<RiderPolicy> make_policy(PolicyType type, const ScenarioConfig& cfg,
                                         LlmBackend* backend,
                                         const prompt::TemplateRegistry* templates,
                                         const TraceTable* traces) {
  switch (type) {
    case PolicyType::rule: return std::make_unique<RulePolicy>(cfg);
    case PolicyType::rl: return std::make_unique<RlPolicy>(cfg);
    case PolicyType::imitation: return std::make_unique<ImitationPolicy>(cfg, traces);
    case PolicyType::llm:
      if (!backend || !templates) throw std::invalid_argument("llm policy needs a backend");
      return std::make_unique<LlmPolicy>(cfg, backend, templates);
    case PolicyType::framework:
      if (!backend || !templates) throw std::invalid_argument("framework policy needs a backend");
      return std::make_unique<FrameworkPolicy>(cfg, backend, templates);
  }
  throw std::invalid_argument("unknown policy type");
}

}  // namespace ecosim::policies
