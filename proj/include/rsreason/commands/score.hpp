#pragma once

#include <string>
#include <vector>

#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/parallel.hpp"
#include "rsreason/reward_requests.hpp"

namespace rsreason::commands {

struct ScoreOptions {
  std::string input;
  std::string output;
  ScoringMode mode = ScoringMode::grounding;
  RewardConfig reward;
  std::size_t parallelism = 1;
  bool overwrite = false;
};

struct ScoreSummary {
  std::size_t lines = 0;
  std::size_t scored = 0;
  std::size_t errors = 0;
};

inline std::optional<ScoringMode> parse_scoring_mode(std::string_view s) {
  if (s == "grounding") return ScoringMode::grounding;
  if (s == "mcq") return ScoringMode::mcq;
  return std::nullopt;
}

/// One output record per input line, in input order. Bad lines become
/// {"line", "error", "fields"} records and scoring continues.
inline Json score_line(const io::JsonlLine& line, ScoringMode mode, const RewardConfig& cfg) {
  Json out{{"line", line.line_no}};
  Json req;
  try {
    req = io::parse_json_line(line.text);
  } catch (const SchemaError& e) {
    out["error"] = e.what();
    return out;
  }
  if (req.is_object()) {
    if (const auto it = req.find("id"); it != req.end()) out["id"] = *it;
    // Score files may name the letter set "gt" as well.
    if (mode == ScoringMode::mcq && !req.contains("gt_letters") && req.contains("gt"))
      req["gt_letters"] = req["gt"];
  }
  RewardOutcome r = reward_request(mode, req, cfg);
  if (auto* j = std::get_if<Json>(&r)) {
    for (auto& [k, v] : j->items()) out[k] = v;
  } else {
    out["error"] = "invalid record";
    out["fields"] = field_errors_to_json(std::get<FieldErrors>(r));
  }
  return out;
}

inline ScoreSummary run_score(const ScoreOptions& opt) {
  ensure_fresh(opt.output, opt.overwrite);
  const auto lines = io::read_jsonl_lines(opt.input);
  std::vector<Json> results(lines.size());
  parallel_for(lines.size(), opt.parallelism,
               [&](std::size_t i) { results[i] = score_line(lines[i], opt.mode, opt.reward); });
  ScoreSummary sum;
  std::string out;
  for (const auto& r : results) {
    ++sum.lines;
    if (r.contains("error")) ++sum.errors;
    else ++sum.scored;
    out += io::dump(r) + "\n";
  }
  write_file_atomic(opt.output, out);
  return sum;
}

}  // namespace rsreason::commands
