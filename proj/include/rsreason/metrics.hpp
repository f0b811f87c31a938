#pragma once

// Evaluation metrics: Avg@k / Conv@k / Pass@k over sampled answers,
// IoU@50 / IoU@70 / mIoU for grounding, and set F1 for multi-object
// recognition.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rsreason/errors.hpp"
#include "rsreason/forge.hpp"
#include "rsreason/parse.hpp"
#include "rsreason/rewards.hpp"

namespace rsreason {

inline constexpr int kDefaultSamplesPerItem = 5;

struct AnswerGroup {
  std::string item_id;
  std::vector<std::string> predictions;
  std::string ground_truth;
};

struct GroundingPrediction {
  std::string item_id;
  std::optional<BBox> predicted;
  BBox ground_truth;
};

struct VQAScores {
  double avg_at_k = 0;
  double conv_at_k = 0;
  double pass_at_k = 0;
  std::size_t items = 0;
  int k = 0;
};

struct GroundingScores {
  double iou_at_50 = 0;
  double iou_at_70 = 0;
  double miou = 0;
  std::size_t items = 0;
};

/// Trim, lowercase, collapse inner whitespace, drop trailing punctuation.
inline std::string normalize_answer(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : detail::trim(s)) {
    if (detail::is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  auto terminal = [](char c) {
    return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
  };
  while (!out.empty() && (terminal(out.back()) || out.back() == ' '))
    out.pop_back();
  return out;
}

namespace detail {

// Canonical digit string of an integer token so "04" and "4" compare equal
// without overflow.
inline std::optional<std::string> canonical_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) return std::nullopt;
  for (std::size_t j = i; j < s.size(); ++j)
    if (!is_ascii_digit(s[j])) return std::nullopt;
  while (i + 1 < s.size() && s[i] == '0') ++i;
  std::string digits(s.substr(i));
  if (digits == "0") negative = false;
  return negative ? "-" + digits : digits;
}

}  // namespace detail

inline bool match_answer(std::string_view pred, std::string_view gt) {
  const std::string p = normalize_answer(pred);
  const std::string g = normalize_answer(gt);
  const auto pi = detail::canonical_integer(p);
  const auto gi = detail::canonical_integer(g);
  if (pi && gi) return *pi == *gi;
  return p == g;
}

inline VQAScores vqa_metrics(const std::vector<AnswerGroup>& groups,
                             int k = kDefaultSamplesPerItem) {
  if (k < 1) throw InvalidInput("vqa_metrics: k must be at least 1");
  if (groups.empty()) throw InvalidInput("vqa_metrics: no items");
  VQAScores s;
  s.k = k;
  s.items = groups.size();
  for (const auto& g : groups) {
    if (g.predictions.size() != static_cast<std::size_t>(k))
      throw InvalidInput("vqa_metrics: item '" + g.item_id + "' has " +
                         std::to_string(g.predictions.size()) +
                         " predictions, expected " + std::to_string(k));
    int c = 0;
    for (const auto& p : g.predictions) c += match_answer(p, g.ground_truth) ? 1 : 0;
    s.avg_at_k += static_cast<double>(c) / k;
    s.conv_at_k += (2 * c > k) ? 1.0 : 0.0;
    s.pass_at_k += (c >= 1) ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(groups.size());
  s.avg_at_k /= n;
  s.conv_at_k /= n;
  s.pass_at_k /= n;
  return s;
}

inline double prediction_iou(const GroundingPrediction& p) {
  return p.predicted ? iou(p.predicted->canonical(), p.ground_truth) : 0.0;
}

inline GroundingScores grounding_metrics(const std::vector<GroundingPrediction>& preds) {
  if (preds.empty()) throw InvalidInput("grounding_metrics: no predictions");
  GroundingScores s;
  s.items = preds.size();
  for (const auto& p : preds) {
    const double v = prediction_iou(p);
    s.miou += v;
    s.iou_at_50 += v > 0.5 ? 1.0 : 0.0;
    s.iou_at_70 += v > 0.7 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(preds.size());
  s.miou /= n;
  s.iou_at_50 /= n;
  s.iou_at_70 /= n;
  return s;
}

inline double f1_multi_object(const std::set<std::string>& pred,
                              const std::set<std::string>& gt) {
  if (pred.empty() && gt.empty()) return 1.0;
  if (pred.empty() || gt.empty()) return 0.0;
  std::size_t tp = 0;
  for (const auto& p : pred) tp += gt.count(p);
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / pred.size();
  const double recall = static_cast<double>(tp) / gt.size();
  return 2.0 * precision * recall / (precision + recall);
}

/// Fraction of single answers matching ground truth (scene classification).
inline double accuracy(const std::vector<std::pair<std::string, std::string>>& pred_gt) {
  if (pred_gt.empty()) throw InvalidInput("accuracy: no items");
  std::size_t hits = 0;
  for (const auto& [p, g] : pred_gt) hits += match_answer(p, g) ? 1 : 0;
  return static_cast<double>(hits) / pred_gt.size();
}

}  // namespace rsreason
