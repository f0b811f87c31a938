#pragma once

// Reward requests as JSON objects, shared by the score command and the
// reward server so both produce identical bodies.
//   grounding: {"response": str, "gt": [x1, y1, x2, y2], "lambda"?: num}
//   mcq:       {"response": str, "gt_letters": [str], "n_options": int,
//               "lambda"?: num}

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "rsreason/json_io.hpp"
#include "rsreason/rewards.hpp"

namespace rsreason {

// Field name -> problem, for every field that failed validation.
using FieldErrors = std::map<std::string, std::string>;

using RewardOutcome = std::variant<Json, FieldErrors>;

namespace detail {

template <typename Fn>
auto collect(FieldErrors& errors, Fn&& fn) -> std::optional<decltype(fn())> {
  try {
    return fn();
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    errors.emplace(e.field(), colon == std::string::npos ? what : what.substr(colon + 2));
  }
  return std::nullopt;
}

}  // namespace detail

inline RewardOutcome grounding_request(const Json& req, const RewardConfig& fallback = {}) {
  FieldErrors errors;
  if (!req.is_object()) return FieldErrors{{"(body)", "expected a JSON object"}};
  auto response = detail::collect(errors, [&] { return io::require_string(req, "response"); });
  auto gt = detail::collect(errors, [&] { return io::bbox_from_json(io::require(req, "gt"), "gt"); });
  auto cfg = detail::collect(errors, [&] { return io::reward_config_from_json(req); });
  if (!errors.empty()) return errors;
  return io::to_json(grounding_reward(*response, *gt, cfg->value_or(fallback)));
}

inline RewardOutcome mcq_request(const Json& req, const RewardConfig& fallback = {}) {
  FieldErrors errors;
  if (!req.is_object()) return FieldErrors{{"(body)", "expected a JSON object"}};
  auto response = detail::collect(errors, [&] { return io::require_string(req, "response"); });
  auto gt = detail::collect(errors, [&] {
    return io::letters_from_json(io::require(req, "gt_letters"), "gt_letters");
  });
  auto n = detail::collect(errors, [&] { return io::n_options_from_json(req); });
  auto cfg = detail::collect(errors, [&] { return io::reward_config_from_json(req); });
  if (!errors.empty()) return errors;
  const LetterSet allowed = LetterSet::first_n(*n);
  if (!gt->is_subset_of(allowed))
    return FieldErrors{{"gt_letters", "letters outside the first n_options options"}};
  return io::to_json(mcq_reward(*response, *gt, allowed, cfg->value_or(fallback)));
}

inline RewardOutcome reward_request(ScoringMode mode, const Json& req,
                                    const RewardConfig& fallback = {}) {
  return mode == ScoringMode::grounding ? grounding_request(req, fallback)
                                        : mcq_request(req, fallback);
}

inline Json field_errors_to_json(const FieldErrors& errors) {
  Json fields = Json::object();
  for (const auto& [k, v] : errors) fields[k] = v;
  return fields;
}

}  // namespace rsreason
