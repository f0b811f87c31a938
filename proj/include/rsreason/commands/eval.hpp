#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsreason/json_io.hpp"
#include "rsreason/manifest.hpp"
#include "rsreason/metrics.hpp"

namespace rsreason::commands {

// vqa: {"id", "preds": [str x k], "gt": str}
// grounding: {"id", "pred": [4] | null, "gt": [4]}
// classification: {"id", "pred": str, "gt": str}
// objects: {"id", "pred": [str], "gt": [str]}
enum class EvalTask { vqa, grounding, classification, objects };

inline std::optional<EvalTask> parse_eval_task(std::string_view s) {
  if (s == "vqa") return EvalTask::vqa;
  if (s == "grounding") return EvalTask::grounding;
  if (s == "classification") return EvalTask::classification;
  if (s == "objects") return EvalTask::objects;
  return std::nullopt;
}

struct EvalOptions {
  std::string input;
  std::string output;
  EvalTask task = EvalTask::vqa;
  int k = kDefaultSamplesPerItem;
  bool overwrite = false;
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_all(const std::vector<io::JsonlLine>& lines, const std::string& path,
                         Parse&& parse) {
  std::vector<T> out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    try {
      out.push_back(parse(io::parse_json_line(l.text)));
    } catch (const InvalidInput& e) {
      throw InvalidInput(path + ":" + std::to_string(l.line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace detail

/// Aggregates predictions into a report. Any bad line aborts: a report
/// over a silently filtered subset would be misleading.
inline Json evaluate(const std::vector<io::JsonlLine>& lines, EvalTask task, int k,
                     const std::string& source = "(input)") {
  if (lines.empty()) throw InvalidInput("eval: no predictions in " + source);
  Json metrics = Json::object();
  Json report{{"task", ""}, {"items", lines.size()}};
  switch (task) {
    case EvalTask::vqa: {
      const auto groups = detail::parse_all<AnswerGroup>(lines, source, io::answer_group_from_json);
      const VQAScores s = vqa_metrics(groups, k);
      report["task"] = "vqa";
      report["k"] = k;
      metrics = Json{{"avg_at_k", s.avg_at_k}, {"conv_at_k", s.conv_at_k}, {"pass_at_k", s.pass_at_k}};
      break;
    }
    case EvalTask::grounding: {
      const auto preds = detail::parse_all<GroundingPrediction>(
          lines, source, io::grounding_prediction_from_json);
      const GroundingScores s = grounding_metrics(preds);
      report["task"] = "grounding";
      metrics = Json{{"iou_at_50", s.iou_at_50}, {"iou_at_70", s.iou_at_70}, {"miou", s.miou}};
      break;
    }
    case EvalTask::classification: {
      const auto pairs = detail::parse_all<std::pair<std::string, std::string>>(
          lines, source, [](const Json& j) {
            io::require_string(j, "id");
            return std::pair{io::require_string(j, "pred"), io::require_string(j, "gt")};
          });
      report["task"] = "classification";
      metrics = Json{{"accuracy", accuracy(pairs)}};
      break;
    }
    case EvalTask::objects: {
      const auto scores = detail::parse_all<double>(lines, source, [](const Json& j) {
        io::require_string(j, "id");
        return f1_multi_object(io::label_set_from_json(io::require(j, "pred"), "pred"),
                               io::label_set_from_json(io::require(j, "gt"), "gt"));
      });
      double total = 0;
      for (double v : scores) total += v;
      report["task"] = "objects";
      metrics = Json{{"f1", total / static_cast<double>(scores.size())}};
      break;
    }
  }
  report["metrics"] = std::move(metrics);
  return report;
}

inline Json run_eval(const EvalOptions& opt) {
  ensure_fresh(opt.output, opt.overwrite);
  const Json report = evaluate(io::read_jsonl_lines(opt.input), opt.task, opt.k, opt.input);
  write_file_atomic(opt.output, report.dump(2) + "\n");
  return report;
}

}  // namespace rsreason::commands
