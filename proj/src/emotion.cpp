#include "ecosim/emotion.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecosim::emotion {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

PadVector compute_pad(const AgentState& prev, const AgentState& cur, const EmotionConfig& cfg) {
  PadVector pad;
  pad.pleasure = clamp_unit(cfg.k_p * static_cast<double>(cur.income - prev.income));
  pad.arousal = clamp_unit(cfg.k_a * (cur.health - prev.health));
  pad.dominance = clamp_unit(cfg.dominance_for_rank(cur.social_rank));
  return pad;
}

EmotionLabel classify_emotion(const PadVector& pad, const EmotionConfig& cfg) {
  EmotionLabel best = EmotionLabel::happiness;
  double best_d2 = pad_distance2(pad, cfg.centroids[0]);
  for (int i = 1; i < kNumEmotionLabels; ++i) {
    const double d2 = pad_distance2(pad, cfg.centroids[i]);
    if (d2 < best_d2) {  // strict: ties keep the earlier label
      best_d2 = d2;
      best = static_cast<EmotionLabel>(i);
    }
  }
  return best;
}

double happiness_fraction(std::span<const EmotionLabel> labels) {
  if (labels.empty()) throw std::invalid_argument("happiness_fraction: empty sequence");
  const auto count =
      std::count(labels.begin(), labels.end(), EmotionLabel::happiness);
  return static_cast<double>(count) / static_cast<double>(labels.size());
}

}  // namespace ecosim::emotion
