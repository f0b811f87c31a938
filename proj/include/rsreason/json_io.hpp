#pragma once

// JSON shapes of records, rewards and reports, plus JSONL helpers.

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rsreason/errors.hpp"
#include "rsreason/forge.hpp"
#include "rsreason/metrics.hpp"
#include "rsreason/parse.hpp"
#include "rsreason/rewards.hpp"

namespace rsreason {

using Json = nlohmann::ordered_json;

// Thrown for a record that does not match its schema; `field` names the
// offending key.
class SchemaError : public InvalidInput {
 public:
  SchemaError(std::string field, const std::string& what)
      : InvalidInput(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace io {

inline const Json& require(const Json& obj, const char* key) {
  if (!obj.is_object()) throw SchemaError("(record)", "expected a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(key, "missing");
  return *it;
}

inline std::string require_string(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_string()) throw SchemaError(key, "expected a string");
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(key, "expected a string");
  return it->get<std::string>();
}

inline double require_number(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_number()) throw SchemaError(key, "expected a number");
  return v.get<double>();
}

inline BBox bbox_from_json(const Json& v, const char* field) {
  if (!v.is_array() || v.size() != 4)
    throw SchemaError(field, "expected an array of 4 numbers");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw SchemaError(field, "expected an array of 4 numbers");
    c[i] = v[i].get<double>();
  }
  BBox b{c[0], c[1], c[2], c[3]};
  if (!b.is_finite()) throw SchemaError(field, "coordinates must be finite");
  return b.canonical();
}

inline Json bbox_to_json(const BBox& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

inline LetterSet letters_from_json(const Json& v, const char* field) {
  if (!v.is_array()) throw SchemaError(field, "expected an array of option letters");
  LetterSet s;
  for (const auto& e : v) {
    if (!e.is_string() || e.get_ref<const std::string&>().size() != 1 ||
        !s.insert(e.get_ref<const std::string&>()[0]))
      throw SchemaError(field, "each entry must be a single letter A-Z");
  }
  return s;
}

inline Json letters_to_json(LetterSet s) {
  Json arr = Json::array();
  for (char c : s.str()) arr.push_back(std::string(1, c));
  return arr;
}

inline std::optional<RewardConfig> reward_config_from_json(const Json& obj) {
  const auto it = obj.find("lambda");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw SchemaError("lambda", "expected a number");
  const double l = it->get<double>();
  if (!(l >= 0.0 && l <= 1.0)) throw SchemaError("lambda", "must lie in [0, 1]");
  return RewardConfig(l);
}

inline int n_options_from_json(const Json& obj) {
  const Json& v = require(obj, "n_options");
  if (!v.is_number_integer()) throw SchemaError("n_options", "expected an integer");
  const auto n = v.get<long long>();
  if (n < 1 || n > 26) throw SchemaError("n_options", "must lie in [1, 26]");
  return static_cast<int>(n);
}

// ---- rewards ----

inline Json to_json(const GroundingReward& r) {
  return Json{{"iou", r.iou},       {"r_acc", r.r_acc}, {"s_think", r.s_think},
              {"s_bbox", r.s_bbox}, {"r_fmt", r.r_fmt}, {"r_overall", r.r_overall}};
}

inline Json to_json(const MCQReward& r) {
  return Json{{"r_acc", r.r_acc},
              {"r_fmt", r.r_fmt},
              {"r_overall", r.r_overall},
              {"n_options", r.n_options},
              {"hard_zero", r.hard_zero}};
}

// ---- datasets ----

inline VQAGroup vqa_group_from_json(const Json& j) {
  VQAGroup g;
  g.image_id = require_string(j, "image_id");
  if (g.image_id.empty()) throw SchemaError("image_id", "must be non-empty");
  g.image_ref = optional_string(j, "image").value_or("");
  const Json& qa = require(j, "qa");
  if (!qa.is_array()) throw SchemaError("qa", "expected an array");
  if (qa.empty()) throw SchemaError("qa", "must be non-empty");
  for (const auto& p : qa) {
    if (!p.is_object()) throw SchemaError("qa", "entries must be objects");
    g.pairs.emplace_back(require_string(p, "q"), require_string(p, "a"));
  }
  return g;
}

// With `no_leak`, the per-option inverted flags and the meta block are
// omitted so that the file can go straight to training.
inline Json to_json(const MCQSample& s, std::uint64_t seed, bool no_leak = false) {
  Json options = Json::array();
  for (const auto& o : s.options) {
    Json opt{{"letter", std::string(1, o.letter)}, {"q", o.question}, {"a", o.answer}};
    if (!no_leak) opt["inverted"] = o.inverted;
    options.push_back(std::move(opt));
  }
  Json j{{"image_id", s.image_id}};
  if (!s.image_ref.empty()) j["image"] = s.image_ref;
  j["query"] = s.query;
  j["options"] = std::move(options);
  j["gt"] = letters_to_json(s.gt_letters);
  if (!no_leak) j["meta"] = Json{{"n_inverted", s.n_inverted()}, {"seed", seed}};
  return j;
}

// ---- metrics inputs ----

inline AnswerGroup answer_group_from_json(const Json& j) {
  AnswerGroup g;
  g.item_id = require_string(j, "id");
  const Json& preds = require(j, "preds");
  if (!preds.is_array()) throw SchemaError("preds", "expected an array of strings");
  for (const auto& p : preds) {
    if (!p.is_string()) throw SchemaError("preds", "expected an array of strings");
    g.predictions.push_back(p.get<std::string>());
  }
  g.ground_truth = require_string(j, "gt");
  return g;
}

inline GroundingPrediction grounding_prediction_from_json(const Json& j) {
  GroundingPrediction p;
  p.item_id = require_string(j, "id");
  const Json& pred = require(j, "pred");
  if (!pred.is_null()) p.predicted = bbox_from_json(pred, "pred");
  p.ground_truth = bbox_from_json(require(j, "gt"), "gt");
  return p;
}

inline std::set<std::string> label_set_from_json(const Json& v, const char* field) {
  if (!v.is_array()) throw SchemaError(field, "expected an array of strings");
  std::set<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw SchemaError(field, "expected an array of strings");
    out.insert(normalize_answer(e.get<std::string>()));
  }
  return out;
}

// ---- JSONL ----

struct JsonlLine {
  std::size_t line_no = 0;  // 1-based position in the file
  std::string text;
};

/// Non-blank lines of a JSONL file.
inline std::vector<JsonlLine> read_jsonl_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open input file: " + path);
  std::vector<JsonlLine> lines;
  std::string text;
  std::size_t no = 0;
  while (std::getline(in, text)) {
    ++no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (detail::trim(text).empty()) continue;
    lines.push_back({no, std::move(text)});
  }
  return lines;
}

inline Json parse_json_line(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw SchemaError("(line)", std::string("invalid JSON: ") + e.what());
  }
}

// Serialised form used in every output file: compact, UTF-8 errors replaced.
inline std::string dump(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace io
}  // namespace rsreason
