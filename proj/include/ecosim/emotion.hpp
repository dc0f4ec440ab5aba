#pragma once

#include <span>

#include "ecosim/config.hpp"
#include "ecosim/types.hpp"

namespace ecosim::emotion {

// Pleasure tracks the income delta, arousal the stamina delta, dominance the
// rank tier; every component is clamped to [-1, 1] after scaling.
PadVector compute_pad(const AgentState& prev, const AgentState& cur, const EmotionConfig& cfg);

// Nearest centroid in Euclidean PAD space. Ties resolve to the earlier label
// in the fixed order happiness < anger < disgust < surprise < fear < sadness
// < neutral.
EmotionLabel classify_emotion(const PadVector& pad, const EmotionConfig& cfg);

struct EmotionSample {
  PadVector pad;
  EmotionLabel label = EmotionLabel::neutral;
};

inline EmotionSample sample_emotion(const AgentState& prev, const AgentState& cur,
                                    const EmotionConfig& cfg) {
  EmotionSample s;
  s.pad = compute_pad(prev, cur, cfg);
  s.label = classify_emotion(s.pad, cfg);
  return s;
}

// Fraction of samples labelled happiness. Throws std::invalid_argument on an
// empty sequence.
double happiness_fraction(std::span<const EmotionLabel> labels);

}  // namespace ecosim::emotion
