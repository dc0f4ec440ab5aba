#include "ecosim/world.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <stdexcept>

#include "ecosim/emotion.hpp"
#include "ecosim/rng.hpp"

namespace ecosim::world {

using policies::Decision;
using policies::DecisionContext;
using policies::PolicyType;

namespace {

nlohmann::json pad_payload(const emotion::EmotionSample& sample, EmotionLabel prev) {
  nlohmann::json j;
  j["label"] = std::string(to_string(sample.label));
  j["prev"] = std::string(to_string(prev));
  j["pleasure"] = sample.pad.pleasure;
  j["arousal"] = sample.pad.arousal;
  j["dominance"] = sample.pad.dominance;
  return j;
}

}  // namespace

World::World(const ScenarioConfig& cfg, std::vector<PolicyType> assignment, LlmBackend* backend,
             const prompt::TemplateRegistry* templates, EventSink* sink,
             const policies::TraceTable* traces)
    : cfg_(cfg), backend_(backend), sink_(sink) {
  if (static_cast<int>(assignment.size()) != cfg_.n_riders) {
    throw std::invalid_argument("policy assignment size must equal n_riders");
  }
  riders_.reserve(assignment.size());
  const int cx = cfg_.grid_width / 2;
  const int cy = cfg_.grid_height / 2;
  const double spread = std::min(cfg_.grid_width, cfg_.grid_height) / 6.0;
  for (int i = 0; i < cfg_.n_riders; ++i) {
    Rider r;
    r.id = i;
    r.policy_type = assignment[static_cast<std::size_t>(i)];
    r.policy = policies::make_policy(r.policy_type, cfg_, backend_, templates, traces);
    const double angle = 2.0 * 3.14159265358979323846 * i / std::max(1, cfg_.n_riders);
    r.workplace = {std::clamp(cx + static_cast<int>(spread * std::cos(angle)), 0,
                              cfg_.grid_width - 1),
                   std::clamp(cy + static_cast<int>(spread * std::sin(angle)), 0,
                              cfg_.grid_height - 1)};
    r.pos = r.workplace;
    r.idle_target = r.workplace;
    r.health = cfg_.h_max;
    r.social_rank = 0.5;
    Rng tier_rng = derive_stream(cfg_.rng_seed, "tier", static_cast<std::uint64_t>(i));
    r.tier = cfg_.acceptance_tiers[tier_rng.next_below(cfg_.acceptance_tiers.size())];
    AgentState initial;
    initial.tick = 0;
    initial.income = 0;
    initial.health = r.health;
    initial.social_rank = r.social_rank;
    initial.emotion = EmotionLabel::neutral;
    r.history.push_back(initial);
    riders_.push_back(std::move(r));
  }
}

void World::emit(Tick tick, int agent, EventKind kind, nlohmann::json payload) {
  if (!sink_) return;
  SimEvent e;
  e.tick = tick;
  e.agent = agent;
  e.kind = kind;
  e.seq = static_cast<std::int64_t>(event_buffer_.size());  // provisional, within tick
  e.payload = std::move(payload);
  event_buffer_.push_back(std::move(e));
}

void World::flush_events() {
  if (!sink_ || event_buffer_.empty()) {
    event_buffer_.clear();
    return;
  }
  // Stable by emission order within an agent, so per-agent causality holds
  // while the log satisfies the (tick, agent, seq) ordering.
  std::stable_sort(event_buffer_.begin(), event_buffer_.end(),
                   [](const SimEvent& a, const SimEvent& b) { return a.agent < b.agent; });
  for (SimEvent& e : event_buffer_) {
    e.seq = next_seq_++;
    sink_->emit(e);
  }
  event_buffer_.clear();
}

void World::check_invariants(const Rider& rider) const {
  if (static_cast<int>(rider.held.size()) > cfg_.max_held_orders) {
    throw std::logic_error("invariant violated: held orders above cap");
  }
  if (rider.health < 0.0 || rider.health > cfg_.h_max + 1e-9) {
    throw std::logic_error("invariant violated: health out of range");
  }
  if (rider.pos.x < 0 || rider.pos.x >= cfg_.grid_width || rider.pos.y < 0 ||
      rider.pos.y >= cfg_.grid_height) {
    throw std::logic_error("invariant violated: rider off grid");
  }
}

double World::percentile_of(Money value, int self_id) const {
  const int n = static_cast<int>(riders_.size());
  if (n <= 1) return 0.5;
  int below = 0;
  int equal = 0;
  for (const Rider& other : riders_) {
    if (other.id == self_id) continue;
    if (other.income < value) ++below;
    else if (other.income == value) ++equal;
  }
  return (static_cast<double>(below) + 0.5 * equal) / static_cast<double>(n - 1);
}

const AgentState& World::state_at(const Rider& rider, Tick at) const {
  const AgentState* best = &rider.history.front();
  for (const AgentState& s : rider.history) {
    if (s.tick <= at) best = &s;
    else break;
  }
  return *best;
}

AgentState World::current_state(const Rider& rider) const {
  AgentState s;
  s.tick = tick_;
  s.income = rider.income;
  s.health = rider.health;
  s.social_rank = rider.social_rank;
  s.emotion = rider.emotion;
  return s;
}

void World::record_tick_state(Rider& rider) {
  rider.history.push_back(current_state(rider));
  const Tick horizon =
      tick_ - std::max(cfg_.desire.lookback_ticks, cfg_.emotion.pad_window_ticks);
  while (rider.history.size() >= 2 && rider.history[1].tick <= horizon) {
    rider.history.pop_front();
  }
}

desire::StateDelta World::window_delta(const Rider& rider, const AgentState& cur) const {
  const AgentState& base = state_at(rider, cur.tick - cfg_.desire.lookback_ticks);
  desire::StateDelta d;
  d.d_income = static_cast<double>(cur.income - base.income);
  d.d_health = cur.health - base.health;
  d.d_rank = cur.social_rank - base.social_rank;
  return d;
}

desire::StateDelta World::effect_estimate(const Rider& rider, Action action,
                                          const Order* pending) const {
  desire::StateDelta d;
  const double idle_cost = cfg_.idle_stamina_cost * static_cast<double>(cfg_.idle_decision_period);
  const double reach = cfg_.speed_per_tick() * static_cast<double>(cfg_.idle_decision_period);
  switch (action) {
    case Action::accept: {
      if (!pending) break;
      const std::int64_t route = manhattan(rider.pos, pending->restaurant_pos) +
                                 manhattan(pending->restaurant_pos, pending->consumer_pos);
      d.d_income = static_cast<double>(pending->payout);
      d.d_health = -cfg_.stamina_cost_per_unit * static_cast<double>(route);
      d.d_rank = percentile_of(rider.income + pending->payout, rider.id) -
                 percentile_of(rider.income, rider.id);
      break;
    }
    case Action::reject:
    case Action::wait:
      d.d_health = -idle_cost;
      break;
    case Action::wander:
      d.d_health = -cfg_.stamina_cost_per_unit * static_cast<double>(cfg_.wander_radius);
      break;
    case Action::continue_delivery: {
      if (rider.held.empty()) break;
      const Order& active = orders_.at(rider.held.front());
      const GridPos target = active.state == OrderState::assigned ? active.restaurant_pos
                                                                  : active.consumer_pos;
      const double leg = static_cast<double>(manhattan(rider.pos, target));
      const bool completes = active.state == OrderState::picked_up && leg <= reach;
      if (completes) {
        d.d_income = static_cast<double>(active.payout);
        d.d_rank = percentile_of(rider.income + active.payout, rider.id) -
                   percentile_of(rider.income, rider.id);
      }
      d.d_health = -cfg_.stamina_cost_per_unit * std::min(leg, reach);
      break;
    }
    case Action::go_sleep: {
      const double restore =
          cfg_.nap_restore_per_tick * static_cast<double>(cfg_.nap_ticks);
      d.d_health = std::min(cfg_.h_max - rider.health, restore);
      break;
    }
  }
  return d;
}

DecisionContext World::build_context(const Rider& rider, const Order* pending,
                                     std::vector<Action> candidates) {
  DecisionContext ctx;
  ctx.state = current_state(rider);
  ctx.prev_sample_state = state_at(rider, tick_ - cfg_.emotion.pad_window_ticks);
  ctx.prev_emotion = rider.emotion;
  ctx.window_delta = window_delta(rider, ctx.state);
  if (pending) {
    ctx.pending_order = *pending;
    ctx.pending_route = manhattan(rider.pos, pending->restaurant_pos) +
                        manhattan(pending->restaurant_pos, pending->consumer_pos);
  }
  for (std::int64_t id : rider.held) ctx.held_orders.push_back(orders_.at(id));
  ctx.candidates = std::move(candidates);
  ctx.effects.reserve(ctx.candidates.size());
  for (Action a : ctx.candidates) ctx.effects.push_back(effect_estimate(rider, a, pending));
  ctx.tick = tick_;
  ctx.agent_id = rider.id;
  ctx.max_held = cfg_.max_held_orders;
  ctx.h_max = cfg_.h_max;
  return ctx;
}

void World::record_sample(Rider& rider, const emotion::EmotionSample& sample) {
  rider.emotion = sample.label;
  rider.samples_day.push_back(sample.label);
}

void World::spawn_orders(Tick tick_in_day) {
  const double rate = cfg_.order_rate_at(tick_in_day);
  if (rate <= 0.0) return;
  Rng rng = derive_stream(cfg_.rng_seed, "spawn", static_cast<std::uint64_t>(tick_));
  if (!rng.chance(std::min(1.0, rate))) return;

  Order order;
  order.id = next_order_id_++;
  order.restaurant_pos = {rng.next_int(0, cfg_.grid_width - 1),
                          rng.next_int(0, cfg_.grid_height - 1)};
  for (int attempt = 0; attempt < 16; ++attempt) {
    order.consumer_pos = {rng.next_int(0, cfg_.grid_width - 1),
                          rng.next_int(0, cfg_.grid_height - 1)};
    if (manhattan(order.restaurant_pos, order.consumer_pos) >= cfg_.min_order_distance) break;
  }
  const std::int64_t dist = manhattan(order.restaurant_pos, order.consumer_pos);
  const Money noise =
      cfg_.payout_noise > 0 ? static_cast<Money>(rng.next_below(
                                  static_cast<std::uint64_t>(cfg_.payout_noise) + 1))
                            : 0;
  order.payout = std::max<Money>(
      1, cfg_.payout_base +
             static_cast<Money>(std::llround(cfg_.payout_per_unit * static_cast<double>(dist))) +
             noise);
  order.created_tick = tick_;
  order.deadline_tick = tick_ + cfg_.pending_expiry_ticks;
  order.state = OrderState::pending;
  orders_.emplace(order.id, order);
  pending_.push_back(order.id);
}

void World::expire_pending() {
  std::vector<std::int64_t> keep;
  keep.reserve(pending_.size());
  for (std::int64_t id : pending_) {
    Order& order = orders_.at(id);
    if (tick_ >= order.deadline_tick) {
      if (!order_transition_allowed(order.state, OrderState::expired)) {
        throw std::logic_error("invariant violated: bad order transition to expired");
      }
      order.state = OrderState::expired;
      emit(tick_, -1, EventKind::expire, {{"order", id}});
    } else {
      keep.push_back(id);
    }
  }
  pending_ = std::move(keep);
}

std::map<int, std::int64_t> World::assign_offers(Tick tick_in_day) {
  std::map<int, std::int64_t> offers;  // rider id -> order id
  if (!cfg_.in_work_window(tick_in_day)) return offers;
  for (std::int64_t order_id : pending_) {
    const Order& order = orders_.at(order_id);
    // Eligible riders ranked by distance to the restaurant, ties by id.
    std::vector<std::pair<std::int64_t, int>> ranked;
    for (const Rider& r : riders_) {
      if (!r.awake()) continue;
      if (static_cast<int>(r.held.size()) >= cfg_.max_held_orders) continue;
      if (offers.count(r.id)) continue;  // one offer per rider per tick
      auto it = last_offer_.find({order_id, r.id});
      if (it != last_offer_.end() && tick_ - it->second < cfg_.reoffer_cooldown_ticks) continue;
      ranked.emplace_back(manhattan(r.pos, order.restaurant_pos), r.id);
    }
    if (ranked.empty()) continue;
    std::sort(ranked.begin(), ranked.end());
    // The acceptance tier drawn at rider creation gates offer prioritization.
    Rng gate = derive_stream(cfg_.rng_seed, "tier_gate", static_cast<std::uint64_t>(tick_),
                             static_cast<std::uint64_t>(order_id));
    for (const auto& [dist, rider_id] : ranked) {
      if (gate.chance(riders_[static_cast<std::size_t>(rider_id)].tier)) {
        offers[rider_id] = order_id;
        break;
      }
    }
  }
  return offers;
}

std::vector<World::PendingDecision> World::collect_decisions(
    const std::map<int, std::int64_t>& offers, Tick tick_in_day) {
  std::vector<PendingDecision> out;
  for (Rider& rider : riders_) {
    // Wake from a finished nap before considering decisions.
    if (rider.sleep == Rider::SleepState::nap && tick_ >= rider.nap_until &&
        cfg_.in_work_window(tick_in_day)) {
      rider.sleep = Rider::SleepState::awake;
      rider.next_idle_decision = tick_;
      emit(tick_, rider.id, EventKind::wake, {{"from", "nap"}});
    }
    if (!rider.awake()) continue;

    PendingDecision pd;
    pd.rider_id = rider.id;
    if (rider.health <= 0.0) {
      // A rider at zero stamina can only go to sleep.
      pd.ctx = build_context(rider, nullptr, {Action::go_sleep});
      out.push_back(std::move(pd));
      continue;
    }
    auto offer_it = offers.find(rider.id);
    if (offer_it != offers.end()) {
      const Order& order = orders_.at(offer_it->second);
      pd.offer_order = order.id;
      pd.ctx = build_context(rider, &order, {Action::accept, Action::reject});
      out.push_back(std::move(pd));
      continue;
    }
    if (rider.held.empty() && cfg_.in_work_window(tick_in_day) &&
        tick_ >= rider.next_idle_decision) {
      std::vector<Action> candidates{Action::wait, Action::wander};
      if (rider.health < cfg_.nap_threshold) candidates.push_back(Action::go_sleep);
      pd.ctx = build_context(rider, nullptr, std::move(candidates));
      out.push_back(std::move(pd));
    }
  }
  return out;
}

void World::dispatch(std::vector<PendingDecision>& pending) {
  auto decide_one = [this](PendingDecision& pd) {
    Rider& rider = riders_[static_cast<std::size_t>(pd.rider_id)];
    Rng stream = derive_stream(cfg_.rng_seed, "policy", static_cast<std::uint64_t>(pd.rider_id),
                               static_cast<std::uint64_t>(tick_));
    pd.decision = rider.policy->decide(pd.ctx, stream);
  };

  // Remote backends fan out across agents within the tick; everything else
  // runs sequentially. Either way results are applied in agent-id order.
  std::size_t backend_calls = 0;
  for (const auto& pd : pending) {
    if (riders_[static_cast<std::size_t>(pd.rider_id)].policy->uses_backend()) ++backend_calls;
  }
  const bool parallel = backend_ && backend_->concurrent_safe() && backend_->is_remote() &&
                        cfg_.llm.fanout > 1 && backend_calls > 1;
  if (!parallel) {
    for (auto& pd : pending) decide_one(pd);
    return;
  }
  const std::size_t fanout = static_cast<std::size_t>(cfg_.llm.fanout);
  for (std::size_t start = 0; start < pending.size(); start += fanout) {
    std::vector<std::future<void>> futures;
    const std::size_t end = std::min(pending.size(), start + fanout);
    for (std::size_t i = start; i < end; ++i) {
      futures.push_back(std::async(std::launch::async, decide_one, std::ref(pending[i])));
    }
    for (auto& f : futures) f.get();
  }
}

void World::apply_decision(PendingDecision& pd) {
  Rider& rider = riders_[static_cast<std::size_t>(pd.rider_id)];

  // Emotion sample: the framework pipeline computed its own; other policies
  // get the world-computed sample from the same state pair.
  emotion::EmotionSample sample;
  const policies::FrameworkOutcome* outcome = rider.policy->last_outcome();
  if (outcome) {
    sample = outcome->sample;
  } else {
    sample = emotion::sample_emotion(pd.ctx.prev_sample_state, pd.ctx.state, cfg_.emotion);
  }

  if (pd.offer_order) {
    const Order& order = orders_.at(*pd.offer_order);
    emit(tick_, rider.id, EventKind::offer,
         {{"order", order.id}, {"payout", order.payout}, {"route", pd.ctx.pending_route}});
    rider.offers_day += 1;
  }

  emit(tick_, rider.id, EventKind::emotion_sample, pad_payload(sample, pd.ctx.prev_emotion));
  if (outcome && outcome->desire_changed) {
    emit(tick_, rider.id, EventKind::desire_update,
         {{"w_income", outcome->desire.w_income},
          {"w_health", outcome->desire.w_health},
          {"w_rank", outcome->desire.w_rank},
          {"focus", std::string(to_string(outcome->focus))},
          {"prev_focus", std::string(to_string(outcome->prev_focus))}});
  }

  nlohmann::json decision_payload;
  decision_payload["action"] = std::string(to_string(pd.decision.action));
  decision_payload["policy"] = std::string(to_string(rider.policy_type));
  if (pd.offer_order) decision_payload["order"] = *pd.offer_order;
  if (!pd.decision.rationale_text.empty()) {
    decision_payload["rationale"] = pd.decision.rationale_text;
  }
  if (!pd.decision.backend_error.empty()) {
    decision_payload["backend_error"] = pd.decision.backend_error;
  }
  emit(tick_, rider.id, EventKind::decision, std::move(decision_payload));

  record_sample(rider, sample);
  if (tap_) tap_(pd.ctx, pd.decision);

  const Tick tick_in_day = tick_ % cfg_.ticks_per_day;
  rider.next_idle_decision = tick_ + cfg_.idle_decision_period;

  switch (pd.decision.action) {
    case Action::accept: {
      Order& order = orders_.at(*pd.offer_order);
      if (!order_transition_allowed(order.state, OrderState::assigned)) {
        throw std::logic_error("invariant violated: bad order transition to assigned");
      }
      order.state = OrderState::assigned;
      std::erase(pending_, order.id);
      rider.held.push_back(order.id);
      rider.accepts_day += 1;
      break;
    }
    case Action::reject:
      last_offer_[{*pd.offer_order, rider.id}] = tick_;
      break;
    case Action::wait:
    case Action::continue_delivery:
      break;
    case Action::wander: {
      Rng rng = derive_stream(cfg_.rng_seed, "wander", static_cast<std::uint64_t>(rider.id),
                              static_cast<std::uint64_t>(tick_));
      const int r = cfg_.wander_radius;
      rider.idle_target = {
          std::clamp(rider.pos.x + rng.next_int(-r, r), 0, cfg_.grid_width - 1),
          std::clamp(rider.pos.y + rng.next_int(-r, r), 0, cfg_.grid_height - 1)};
      break;
    }
    case Action::go_sleep: {
      const bool collapsed = rider.health <= 0.0;
      const bool night = !cfg_.in_work_window(tick_in_day);
      if (collapsed) {
        go_to_sleep(rider, Rider::SleepState::collapse);
      } else if (night) {
        go_to_sleep(rider, Rider::SleepState::night);
      } else {
        rider.sleep = Rider::SleepState::nap;
        rider.nap_until = tick_ + cfg_.nap_ticks;
        emit(tick_, rider.id, EventKind::sleep, {{"reason", "nap"}});
      }
      break;
    }
  }
  check_invariants(rider);
}

void World::go_to_sleep(Rider& rider, Rider::SleepState state) {
  rider.sleep = state;
  const char* reason = state == Rider::SleepState::collapse ? "collapse" : "night";
  emit(tick_, rider.id, EventKind::sleep, {{"reason", reason}});
}

void World::handle_arrival(Rider& rider, Tick tick_in_day) {
  Order& order = orders_.at(rider.held.front());
  if (order.state == OrderState::assigned && rider.pos == order.restaurant_pos) {
    order.state = OrderState::picked_up;
    emit(tick_, rider.id, EventKind::pickup, {{"order", order.id}});
    return;
  }
  if (order.state == OrderState::picked_up && rider.pos == order.consumer_pos) {
    order.state = OrderState::delivered;
    rider.income += order.payout;
    rider.delivered_day += 1;
    emit(tick_, rider.id, EventKind::deliver, {{"order", order.id}, {"payout", order.payout}});
    rider.held.pop_front();
    if (rider.held.empty()) {
      rider.idle_target = rider.workplace;
      if (!cfg_.in_work_window(tick_in_day)) {
        // Past the work window the held order had to be finished first;
        // with it delivered, the rider can rest.
        go_to_sleep(rider, Rider::SleepState::night);
      }
    }
  }
}

void World::move_rider(Rider& rider, Tick tick_in_day) {
  if (rider.sleep == Rider::SleepState::nap) {
    rider.health = std::min(cfg_.h_max, rider.health + cfg_.nap_restore_per_tick);
    return;
  }
  if (!rider.awake()) return;

  auto current_target = [&]() -> std::optional<GridPos> {
    if (!rider.held.empty()) {
      const Order& order = orders_.at(rider.held.front());
      return order.state == OrderState::assigned ? order.restaurant_pos : order.consumer_pos;
    }
    if (rider.pos == rider.idle_target) return std::nullopt;
    return rider.idle_target;
  };

  // Zero-distance arrivals (accepted an order while standing at the pickup).
  while (!rider.held.empty()) {
    const auto target = current_target();
    if (!target || !(rider.pos == *target)) break;
    handle_arrival(rider, tick_in_day);
    if (!rider.awake()) return;
  }

  rider.move_budget += cfg_.speed_per_tick();
  std::int64_t steps = static_cast<std::int64_t>(rider.move_budget);
  rider.move_budget -= static_cast<double>(steps);
  std::int64_t moved = 0;

  while (steps > 0) {
    const auto target = current_target();
    if (!target) break;
    std::int64_t dist = manhattan(rider.pos, *target);
    const std::int64_t m = std::min(steps, dist);
    std::int64_t left = m;
    // Manhattan movement: close the x gap first, then y.
    const std::int64_t dx = std::min<std::int64_t>(std::abs(target->x - rider.pos.x), left);
    rider.pos.x += target->x > rider.pos.x ? static_cast<int>(dx) : -static_cast<int>(dx);
    left -= dx;
    const std::int64_t dy = std::min<std::int64_t>(std::abs(target->y - rider.pos.y), left);
    rider.pos.y += target->y > rider.pos.y ? static_cast<int>(dy) : -static_cast<int>(dy);
    steps -= m;
    moved += m;
    if (!rider.held.empty() && rider.pos == *target) {
      handle_arrival(rider, tick_in_day);
      if (!rider.awake()) break;
    }
  }

  if (moved > 0) {
    rider.distance_total += moved;
    rider.health -= cfg_.stamina_cost_per_unit * static_cast<double>(moved);
  } else {
    rider.health -= cfg_.idle_stamina_cost;
  }
  rider.health = std::clamp(rider.health, 0.0, cfg_.h_max);
}

void World::step() {
  const Tick tick_in_day = tick_ % cfg_.ticks_per_day;

  // Morning wake-up at the start of the work window.
  if (tick_in_day == cfg_.work_start_tick) {
    for (Rider& rider : riders_) {
      if (rider.sleep == Rider::SleepState::night ||
          rider.sleep == Rider::SleepState::collapse ||
          rider.sleep == Rider::SleepState::nap) {
        rider.sleep = Rider::SleepState::awake;
        rider.idle_target = rider.workplace;
        rider.next_idle_decision = tick_ + rider.id % cfg_.idle_decision_period;
        emit(tick_, rider.id, EventKind::wake, nlohmann::json::object());
      }
    }
  }

  spawn_orders(tick_in_day);
  expire_pending();

  auto offers = assign_offers(tick_in_day);
  auto decisions = collect_decisions(offers, tick_in_day);
  dispatch(decisions);
  for (auto& pd : decisions) apply_decision(pd);

  for (Rider& rider : riders_) {
    move_rider(rider, tick_in_day);
    check_invariants(rider);
    record_tick_state(rider);
  }

  // Night boundary: idle riders rest; riders with orders in hand keep going.
  if (tick_in_day == cfg_.work_end_tick) {
    for (Rider& rider : riders_) {
      if (rider.awake() && rider.held.empty()) go_to_sleep(rider, Rider::SleepState::night);
    }
  }

  flush_events();
  ++tick_;
}

void World::rollover(int completed_day) {
  // End-of-day emotion sample for every rider, pre-restore and pre-rerank.
  for (Rider& rider : riders_) {
    const AgentState cur = current_state(rider);
    const AgentState& ref = state_at(rider, tick_ - cfg_.emotion.pad_window_ticks);
    const auto sample = emotion::sample_emotion(ref, cur, cfg_.emotion);
    emit(tick_, rider.id, EventKind::emotion_sample, pad_payload(sample, rider.emotion));
    record_sample(rider, sample);
  }

  for (Rider& rider : riders_) {
    DailyRow row;
    row.day = completed_day;
    row.agent = rider.id;
    row.policy = std::string(policies::to_string(rider.policy_type));
    row.money = rider.income;
    row.income_day = rider.income - rider.day_start_income;
    row.distance = rider.distance_total;
    row.distance_day = rider.distance_total - rider.day_start_distance;
    row.happiness = emotion::happiness_fraction(rider.samples_day);
    if (const auto* outcome = rider.policy->last_outcome()) {
      row.w_income = outcome->desire.w_income;
      row.w_health = outcome->desire.w_health;
      row.w_rank = outcome->desire.w_rank;
      row.focus = std::string(to_string(outcome->desire.focus()));
    } else if (rider.policy_type == PolicyType::framework) {
      const DesireVector& d = cfg_.desire.initial;
      row.w_income = d.w_income;
      row.w_health = d.w_health;
      row.w_rank = d.w_rank;
      row.focus = std::string(to_string(d.focus()));
    } else {
      row.focus = "-";
    }
    row.offers = rider.offers_day;
    row.accepts = rider.accepts_day;
    row.delivered = rider.delivered_day;
    daily_rows_.push_back(std::move(row));
  }

  // Social ranks recompute as income percentiles; sleep restores stamina.
  for (Rider& rider : riders_) {
    rider.social_rank = percentile_of(rider.income, rider.id);
    rider.health = cfg_.h_max;
    rider.day_start_income = rider.income;
    rider.day_start_distance = rider.distance_total;
    rider.offers_day = 0;
    rider.accepts_day = 0;
    rider.delivered_day = 0;
    rider.samples_day.clear();
  }

  // Memory upkeep for framework riders.
  for (Rider& rider : riders_) {
    memory::MemoryStore* store = rider.policy->memory_store();
    if (!store) continue;
    store->evict_older_than(tick_, cfg_.memory.ttl_ticks);
    if (!memory_dir_.empty()) {
      std::filesystem::create_directories(memory_dir_);
      store->snapshot_jsonl(memory_dir_ + "/agent_" + std::to_string(rider.id) + ".jsonl");
    }
  }
}

void World::run_all() {
  const Tick total = cfg_.total_ticks();
  while (tick_ < total) {
    if (tick_ > 0 && tick_ % cfg_.ticks_per_day == 0) {
      rollover(static_cast<int>(tick_ / cfg_.ticks_per_day));
    }
    step();
  }
  rollover(cfg_.n_days);
  flush_events();
}

policies::TraceTable build_rule_traces(const ScenarioConfig& cfg) {
  std::vector<PolicyType> assignment(static_cast<std::size_t>(cfg.n_riders), PolicyType::rule);
  World shadow(cfg, assignment, nullptr, nullptr, nullptr);
  policies::TraceTable traces;
  shadow.set_decision_tap([&traces](const DecisionContext& ctx, const Decision& d) {
    traces.observe(policies::discretize(ctx), d.action);
  });
  shadow.run_all();
  return traces;
}

RunResult run(const ScenarioConfig& cfg, const std::vector<PolicyType>& assignment,
              LlmBackend* backend, const prompt::TemplateRegistry* templates, EventSink* sink,
              const std::string& memory_dir) {
  policies::TraceTable traces;
  const bool needs_traces =
      std::any_of(assignment.begin(), assignment.end(),
                  [](PolicyType t) { return t == PolicyType::imitation; });
  if (needs_traces) traces = build_rule_traces(cfg);

  World world(cfg, assignment, backend, templates, sink, needs_traces ? &traces : nullptr);
  if (!memory_dir.empty()) world.set_memory_dir(memory_dir);
  world.run_all();

  RunResult result;
  result.daily = world.daily_rows();
  result.ticks = world.tick();
  return result;
}

}  // namespace ecosim::world
