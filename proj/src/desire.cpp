#include "ecosim/desire.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecosim::desire {

namespace {

constexpr Dimension kDims[3] = {Dimension::income, Dimension::health, Dimension::rank};

double window_scale(Dimension d, const DesireConfig& cfg) {
  switch (d) {
    case Dimension::income: return cfg.window_scale_income;
    case Dimension::health: return cfg.window_scale_health;
    case Dimension::rank: return cfg.window_scale_rank;
  }
  return 1.0;
}

}  // namespace

double reward(const StateDelta& delta, const RewardSpec& spec) {
  return spec.a_income * (delta.d_income / spec.s_income) +
         spec.a_health * (delta.d_health / spec.s_health) +
         spec.a_rank * (delta.d_rank / spec.s_rank);
}

bool dimension_anomalous(Dimension d, const StateDelta& delta, const DesireConfig& cfg) {
  const double z = delta[d] / window_scale(d, cfg);
  if (!(z < cfg.anomaly_threshold)) return false;
  for (Dimension other : kDims) {
    if (other == d) continue;
    if (delta[other] < 0.0) return false;  // others must stay stable or improve
  }
  return true;
}

DesireVector update_desire(EmotionLabel prev_emotion, EmotionLabel cur_emotion,
                           const StateDelta& delta, const DesireVector& prev_desire,
                           const DesireConfig& cfg) {
  if (cur_emotion == prev_emotion) return prev_desire;

  // At most one dimension can satisfy the predicate (it requires every other
  // delta to be non-negative), so a first-match scan is exhaustive.
  for (Dimension d : kDims) {
    if (!dimension_anomalous(d, delta, cfg)) continue;
    DesireVector next = prev_desire;
    const double top = std::max({next.w_income, next.w_health, next.w_rank});
    next[d] = top + cfg.boost_increment;
    next.normalize();
    return next;
  }
  return prev_desire;
}

ObjectivePlan optimize_objective(const DesireVector& desire, const StateDelta& /*delta*/,
                                 const DesireConfig& /*cfg*/) {
  if (!desire.normalized(1e-6)) {
    throw std::invalid_argument("optimize_objective: desire vector not normalized");
  }
  ObjectivePlan plan;
  plan.desire = desire;
  plan.focus_dimension = desire.focus();
  plan.reward_weights[0] = desire.w_income;
  plan.reward_weights[1] = desire.w_health;
  plan.reward_weights[2] = desire.w_rank;
  plan.prompt_template_id = "objective_" + std::string(to_string(plan.focus_dimension));
  return plan;
}

std::vector<double> tilt_distribution(const ActionDistribution& dist) {
  const std::size_t n = dist.actions.size();
  if (n == 0) throw std::invalid_argument("tilt_distribution: empty action set");
  if (dist.base_probs.size() != n || dist.rewards.size() != n) {
    throw std::invalid_argument("tilt_distribution: size mismatch");
  }
  if (!(dist.beta > 0.0)) throw std::invalid_argument("tilt_distribution: beta must be > 0");

  double base_sum = 0.0;
  bool any_positive = false;
  for (double p : dist.base_probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("tilt_distribution: negative or non-finite base prob");
    }
    if (p > 0.0) any_positive = true;
    base_sum += p;
  }
  if (!any_positive) throw std::invalid_argument("tilt_distribution: all base probs are zero");
  if (std::abs(base_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("tilt_distribution: base probs must sum to 1");
  }

  // Max-subtraction keeps exp() bounded; the shift cancels through Z*.
  double max_r = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (dist.base_probs[i] > 0.0) max_r = std::max(max_r, dist.rewards[i]);
  }

  std::vector<double> out(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist.base_probs[i] <= 0.0) continue;
    const double w = dist.base_probs[i] * std::exp((dist.rewards[i] - max_r) / dist.beta);
    out[i] = w;
    z += w;
  }
  for (double& w : out) w /= z;
  return out;
}

}  // namespace ecosim::desire
