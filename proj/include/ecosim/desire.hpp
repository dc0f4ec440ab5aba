#pragma once

#include <string>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/types.hpp"

namespace ecosim::desire {

// Signed state variations over a look-back window.
struct StateDelta {
  double d_income = 0.0;
  double d_health = 0.0;
  double d_rank = 0.0;

  double operator[](Dimension d) const {
    switch (d) {
      case Dimension::income: return d_income;
      case Dimension::health: return d_health;
      case Dimension::rank: return d_rank;
    }
    return 0.0;
  }
};

// Weighted normalized linear reward over (dI, dH, dSR).
struct RewardSpec {
  double a_income = 1.0;
  double a_health = 1.0;
  double a_rank = 1.0;
  double s_income = 1.0;  // normalizers, > 0
  double s_health = 1.0;
  double s_rank = 1.0;
};

double reward(const StateDelta& delta, const RewardSpec& spec);

// The renewed objective derived from the current desire vector.
struct ObjectivePlan {
  DesireVector desire;
  Dimension focus_dimension = Dimension::income;
  double reward_weights[3] = {0, 0, 0};  // (a_I, a_H, a_SR) = desire weights
  std::string prompt_template_id;
};

// Emotion transition is the sole trigger: identical labels return prev_desire
// untouched. On a transition, the dimension whose scale-normalized windowed
// delta falls below cfg.anomaly_threshold while every other dimension's raw
// delta is >= 0 gets boosted to max(weights) + cfg.boost_increment, then the
// vector is renormalized. No anomalous dimension -> unchanged.
DesireVector update_desire(EmotionLabel prev_emotion, EmotionLabel cur_emotion,
                           const StateDelta& delta, const DesireVector& prev_desire,
                           const DesireConfig& cfg);

// Exposed for the anomaly-detector oracle in tests.
bool dimension_anomalous(Dimension d, const StateDelta& delta, const DesireConfig& cfg);

ObjectivePlan optimize_objective(const DesireVector& desire, const StateDelta& delta,
                                 const DesireConfig& cfg);

// A finite base policy over candidate actions plus per-action reward
// estimates; tilt_distribution reweights it into the aligned distribution.
struct ActionDistribution {
  std::vector<Action> actions;
  std::vector<double> base_probs;  // pi_F, sums to 1
  std::vector<double> rewards;     // Reward(dI, dH, dSR) estimate per action
  double beta = 1.0;
};

// pi*(a) = pi_F(a) * exp(reward(a) / beta) / Z*. Guards overflow by
// subtracting the max reward before exponentiation (Z* cancels the shift).
// Throws std::invalid_argument on malformed inputs or all-zero base_probs.
std::vector<double> tilt_distribution(const ActionDistribution& dist);

}  // namespace ecosim::desire
