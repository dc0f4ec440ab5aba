#include "ecosim/types.hpp"

namespace ecosim {

std::string_view to_string(EmotionLabel label) {
  switch (label) {
    case EmotionLabel::happiness: return "happiness";
    case EmotionLabel::anger: return "anger";
    case EmotionLabel::disgust: return "disgust";
    case EmotionLabel::surprise: return "surprise";
    case EmotionLabel::fear: return "fear";
    case EmotionLabel::sadness: return "sadness";
    case EmotionLabel::neutral: return "neutral";
  }
  return "neutral";
}

std::optional<EmotionLabel> parse_emotion_label(std::string_view text) {
  for (EmotionLabel l : all_emotion_labels()) {
    if (text == to_string(l)) return l;
  }
  return std::nullopt;
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::income: return "income";
    case Dimension::health: return "health";
    case Dimension::rank: return "rank";
  }
  return "income";
}

std::string_view to_string(OrderState s) {
  switch (s) {
    case OrderState::pending: return "pending";
    case OrderState::assigned: return "assigned";
    case OrderState::picked_up: return "picked_up";
    case OrderState::delivered: return "delivered";
    case OrderState::expired: return "expired";
  }
  return "pending";
}

bool order_transition_allowed(OrderState from, OrderState to) {
  switch (from) {
    case OrderState::pending:
      return to == OrderState::assigned || to == OrderState::expired;
    case OrderState::assigned:
      return to == OrderState::picked_up;
    case OrderState::picked_up:
      return to == OrderState::delivered;
    case OrderState::delivered:
    case OrderState::expired:
      return false;
  }
  return false;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::accept: return "accept";
    case Action::reject: return "reject";
    case Action::wait: return "wait";
    case Action::wander: return "wander";
    case Action::continue_delivery: return "continue_delivery";
    case Action::go_sleep: return "go_sleep";
  }
  return "wait";
}

std::optional<Action> parse_action(std::string_view text) {
  for (int i = 0; i < kNumActions; ++i) {
    Action a = static_cast<Action>(i);
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

}  // namespace ecosim
