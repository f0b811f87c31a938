#pragma once

// Grounding (IoU) and multiple-choice VQA rewards. Both combine an accuracy
// term and a format term as (1 - lambda) * r_acc + lambda * r_fmt.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "rsreason/errors.hpp"
#include "rsreason/parse.hpp"

namespace rsreason {

inline constexpr double kDefaultLambda = 0.1;

class RewardConfig {
 public:
  RewardConfig() = default;
  explicit RewardConfig(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw InvalidInput("lambda must lie in [0, 1]");
  }
  [[nodiscard]] double lambda() const { return lambda_; }

 private:
  double lambda_ = kDefaultLambda;
};

struct GroundingReward {
  double iou = 0;
  double r_acc = 0;
  int s_think = 0;
  int s_bbox = 0;
  double r_fmt = 0;
  double r_overall = 0;

  friend bool operator==(const GroundingReward&, const GroundingReward&) = default;
};

struct MCQReward {
  double r_acc = 0;
  int r_fmt = 0;
  double r_overall = 0;
  int n_options = 0;
  bool hard_zero = false;

  friend bool operator==(const MCQReward&, const MCQReward&) = default;
};

// Reward families a trainer can request. Free-form VQA scoring has no
// defined reward and is not offered.
enum class ScoringMode { grounding, mcq };

inline double combine(double r_acc, double r_fmt, const RewardConfig& cfg) {
  return (1.0 - cfg.lambda()) * r_acc + cfg.lambda() * r_fmt;
}

/// Axis-aligned IoU of two canonical boxes. A zero union gives 0.
inline double iou(const BBox& a, const BBox& b) {
  if (!a.is_finite() || !b.is_finite())
    throw InvalidInput("iou: non-finite box coordinate");
  if (!a.is_canonical() || !b.is_canonical())
    throw InvalidInput("iou: box corners not in canonical order");
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline GroundingReward grounding_reward(std::string_view response,
                                        const BBox& gt,
                                        const RewardConfig& cfg = {}) {
  if (!gt.is_finite() || !gt.is_canonical())
    throw InvalidInput("grounding_reward: ground-truth box must be finite and canonical");
  GroundingReward r;
  const ThinkSplit split = split_think(response);
  r.s_think = split.well_formed ? 1 : 0;
  if (const auto box = extract_bbox(split.tail)) {
    r.s_bbox = 1;
    r.iou = iou(*box, gt);
    r.r_acc = r.iou;
  }
  r.r_fmt = (r.s_think + r.s_bbox) / 2.0;
  r.r_overall = combine(r.r_acc, r.r_fmt, cfg);
  return r;
}

inline GroundingReward grounding_reward(const RawResponse& response,
                                        const BBox& gt,
                                        const RewardConfig& cfg = {}) {
  return grounding_reward(response.text, gt, cfg);
}

/// Option-level symmetric accuracy: 1 - |G xor P| / N.
inline double option_accuracy(LetterSet gt, LetterSet predicted,
                              LetterSet allowed) {
  const int n = allowed.size();
  if (n == 0) throw InvalidInput("option_accuracy: empty option set");
  const int mismatches = gt.minus(predicted).size() + predicted.minus(gt).size();
  return 1.0 - static_cast<double>(mismatches) / n;
}

inline MCQReward mcq_reward(std::string_view response, LetterSet gt,
                            LetterSet allowed, const RewardConfig& cfg = {}) {
  if (!allowed.is_prefix_range())
    throw InvalidInput("mcq_reward: allowed options must be non-empty and contiguous from 'A'");
  if (!gt.is_subset_of(allowed))
    throw InvalidInput("mcq_reward: ground-truth letters outside the allowed options");

  MCQReward r;
  r.n_options = allowed.size();
  const ThinkSplit split = split_think(response);
  r.r_fmt = split.well_formed ? 1 : 0;

  const ParseOutcome parsed = extract_letters(split.tail, allowed);
  if (parsed.contains_foreign) {
    r.hard_zero = true;
    r.r_acc = 0.0;
  } else {
    const LetterSet predicted = parsed.letters.value_or(LetterSet{});
    r.r_acc = option_accuracy(gt, predicted, allowed);
  }
  r.r_overall = combine(r.r_acc, r.r_fmt, cfg);
  return r;
}

inline MCQReward mcq_reward(const RawResponse& response, LetterSet gt,
                            LetterSet allowed, const RewardConfig& cfg = {}) {
  return mcq_reward(response.text, gt, allowed, cfg);
}

}  // namespace rsreason
