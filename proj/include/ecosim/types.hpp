#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecosim {

using Tick = std::int64_t;
using Money = std::int64_t;  // integer currency units so income accounting is exact

// ---------------------------------------------------------------------------
// Emotion
// ---------------------------------------------------------------------------

// Closed 7-label emotion set. The declaration order is the fixed tie-break
// order used by the classifier.
enum class EmotionLabel : int {
  happiness = 0,
  anger,
  disgust,
  surprise,
  fear,
  sadness,
  neutral,
};

inline constexpr int kNumEmotionLabels = 7;

inline constexpr std::array<EmotionLabel, kNumEmotionLabels> all_emotion_labels() {
  return {EmotionLabel::happiness, EmotionLabel::anger,    EmotionLabel::disgust,
          EmotionLabel::surprise,  EmotionLabel::fear,     EmotionLabel::sadness,
          EmotionLabel::neutral};
}

std::string_view to_string(EmotionLabel label);
std::optional<EmotionLabel> parse_emotion_label(std::string_view text);

// Continuous PAD coordinates; each axis is clamped to [-1, 1] after scaling.
struct PadVector {
  double pleasure = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;
};

inline double pad_distance2(const PadVector& a, const PadVector& b) {
  const double dp = a.pleasure - b.pleasure;
  const double da = a.arousal - b.arousal;
  const double dd = a.dominance - b.dominance;
  return dp * dp + da * da + dd * dd;
}

// ---------------------------------------------------------------------------
// Agent state and desire
// ---------------------------------------------------------------------------

struct AgentState {
  Tick tick = 0;
  Money income = 0;           // cumulative
  double health = 0.0;        // stamina points in [0, h_max]
  double social_rank = 0.0;   // income percentile among riders, [0, 1]
  EmotionLabel emotion = EmotionLabel::neutral;
};

// The triadic desire architecture: priority weights over income / health /
// social rank, kept normalized to sum 1.
enum class Dimension : int { income = 0, health = 1, rank = 2 };

std::string_view to_string(Dimension d);

struct DesireVector {
  double w_income = 1.0 / 3.0;
  double w_health = 1.0 / 3.0;
  double w_rank = 1.0 / 3.0;

  double operator[](Dimension d) const {
    switch (d) {
      case Dimension::income: return w_income;
      case Dimension::health: return w_health;
      case Dimension::rank: return w_rank;
    }
    std::abort();
  }

  double& operator[](Dimension d) {
    switch (d) {
      case Dimension::income: return w_income;
      case Dimension::health: return w_health;
      case Dimension::rank: return w_rank;
    }
    std::abort();
  }

  double sum() const { return w_income + w_health + w_rank; }

  void normalize() {
    const double s = sum();
    if (s <= 0.0) throw std::invalid_argument("DesireVector: non-positive weight sum");
    w_income /= s;
    w_health /= s;
    w_rank /= s;
  }

  bool normalized(double tol = 1e-9) const {
    return w_income >= 0.0 && w_health >= 0.0 && w_rank >= 0.0 &&
           std::abs(sum() - 1.0) <= tol;
  }

  // Argmax with the fixed income < health < rank tie-break.
  Dimension focus() const {
    Dimension best = Dimension::income;
    for (Dimension d : {Dimension::health, Dimension::rank}) {
      if ((*this)[d] > (*this)[best]) best = d;
    }
    return best;
  }
};

// ---------------------------------------------------------------------------
// Grid and orders
// ---------------------------------------------------------------------------

struct GridPos {
  int x = 0;
  int y = 0;
  bool operator==(const GridPos&) const = default;
};

inline std::int64_t manhattan(GridPos a, GridPos b) {
  return std::abs(static_cast<std::int64_t>(a.x) - b.x) +
         std::abs(static_cast<std::int64_t>(a.y) - b.y);
}

enum class OrderState : int { pending = 0, assigned, picked_up, delivered, expired };

std::string_view to_string(OrderState s);

struct Order {
  std::int64_t id = 0;
  GridPos restaurant_pos;
  GridPos consumer_pos;
  Money payout = 0;
  Tick created_tick = 0;
  Tick deadline_tick = 0;
  OrderState state = OrderState::pending;
};

// Legal transitions: pending->assigned->picked_up->delivered, or
// pending->expired. Expiry only reaps orders nobody accepted; once assigned
// an order is carried to completion ("complete the order in hand before rest").
bool order_transition_allowed(OrderState from, OrderState to);

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

// Fixed action order; doubles as the RL / tie-break ordering.
enum class Action : int {
  accept = 0,
  reject,
  wait,
  wander,
  continue_delivery,
  go_sleep,
};

inline constexpr int kNumActions = 6;

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view text);

}  // namespace ecosim
