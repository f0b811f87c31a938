#pragma once

// Reasoner/Perceiver dialogue: turn parsing, the bounded question loop,
// the Verifier gate, and rendering an accepted dialogue as a self-QA trace.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsreason/errors.hpp"
#include "rsreason/forge.hpp"
#include "rsreason/parse.hpp"
#include "rsreason/socratic/backend.hpp"
#include "rsreason/socratic/prompts.hpp"

namespace rsreason::socratic {

inline constexpr std::string_view kDefaultFinalPrefix = "Final Answer:";
inline constexpr std::string_view kTraceOpening =
    "Alright, I will reason in a self QA style and give the final reply.";

enum class OpeningEnforcement { warn, retry };

struct SocraticConfig {
  int max_loop = 6;
  std::string final_prefix{kDefaultFinalPrefix};
  std::string reasoner_prompt;  // empty: rendered from the built-in template
  std::string perceiver_prompt{kPerceiverPrompt};
  std::string verifier_prompt{kVerifierPrompt};
  int retry_limit = 2;
  OpeningEnforcement perceiver_opening_enforcement = OpeningEnforcement::warn;

  void validate() const {
    if (max_loop < 2) throw InvalidInput("max_loop must be at least 2");
    if (final_prefix.empty()) throw InvalidInput("final_prefix must be non-empty");
    if (retry_limit < 0) throw InvalidInput("retry_limit must be non-negative");
  }
  [[nodiscard]] std::string effective_reasoner_prompt() const {
    return reasoner_prompt.empty() ? render_reasoner_prompt(max_loop, final_prefix)
                                   : reasoner_prompt;
  }
  [[nodiscard]] int question_budget() const { return max_loop - 1; }
};

struct Question {
  std::string text;
  friend bool operator==(const Question&, const Question&) = default;
};
struct Final {
  std::string text;
  friend bool operator==(const Final&, const Final&) = default;
};

struct ReasonerTurn {
  std::string thinking;
  std::variant<Question, Final> action;

  [[nodiscard]] bool is_final() const { return std::holds_alternative<Final>(action); }
  friend bool operator==(const ReasonerTurn&, const ReasonerTurn&) = default;
};

struct PerceiverTurn {
  std::string text;
  friend bool operator==(const PerceiverTurn&, const PerceiverTurn&) = default;
};

using Turn = std::variant<ReasonerTurn, PerceiverTurn>;

enum class ViolationKind {
  missing_thinking,
  multiple_questions,
  both_actions,
  no_action,
  trailing_garbage,
  forwarded_query,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::missing_thinking: return "missing_thinking";
    case ViolationKind::multiple_questions: return "multiple_questions";
    case ViolationKind::both_actions: return "both_actions";
    case ViolationKind::no_action: return "no_action";
    case ViolationKind::trailing_garbage: return "trailing_garbage";
    case ViolationKind::forwarded_query: return "forwarded_query";
  }
  return "unknown";
}

struct ProtocolViolation {
  ViolationKind kind;
  std::string detail;
};

enum class DialogueStatus { running, final, failed };

struct DialogueState {
  std::string task_query;
  std::string image_metadata;
  std::vector<Turn> turns;
  int question_rounds_used = 0;
  DialogueStatus status = DialogueStatus::running;
  std::string failure_reason;      // set when status == failed
  int retries_used = 0;            // re-prompts after protocol violations
  std::vector<std::string> warnings;

  [[nodiscard]] const ReasonerTurn* final_turn() const {
    if (turns.empty()) return nullptr;
    const auto* r = std::get_if<ReasonerTurn>(&turns.back());
    return (r && r->is_final()) ? r : nullptr;
  }
  [[nodiscard]] std::string final_answer() const {
    const auto* r = final_turn();
    return r ? std::get<Final>(r->action).text : std::string{};
  }
};

struct Verdict {
  bool accepted = false;
  std::string reason;  // non-empty when rejected
};

// Image metadata shown to the Reasoner: modality, count and size only.
struct ImageMetadata {
  std::string modality;
  std::string count;
  std::string size;

  [[nodiscard]] std::string describe() const {
    std::string out;
    auto add = [&](std::string_view key, const std::string& v) {
      if (v.empty()) return;
      if (!out.empty()) out += ", ";
      out += key;
      out += ": ";
      out += v;
    };
    add("modality", modality);
    add("count", count);
    add("size", size);
    return out.empty() ? "none" : out;
  }
};

namespace detail {

inline constexpr std::string_view kThinkingOpen = "<thinking>";
inline constexpr std::string_view kThinkingClose = "</thinking>";
inline constexpr std::string_view kQuestionOpen = "<question>";
inline constexpr std::string_view kQuestionClose = "</question>";

inline std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace detail

using ReasonerParse = std::variant<ReasonerTurn, ProtocolViolation>;

/// Parses one Reasoner reply: a leading <thinking> block followed by exactly
/// one <question> block or a final answer introduced by `final_prefix`.
inline ReasonerParse parse_reasoner_turn(std::string_view text,
                                         std::string_view final_prefix) {
  using rsreason::detail::trim;
  using namespace detail;
  const std::string_view s = trim(text);
  if (!s.starts_with(kThinkingOpen))
    return ProtocolViolation{ViolationKind::missing_thinking,
                             "reply must begin with <thinking>...</thinking>"};
  const auto close = s.find(kThinkingClose);
  if (close == std::string_view::npos)
    return ProtocolViolation{ViolationKind::missing_thinking, "unterminated <thinking> block"};
  const std::string_view thinking =
      trim(s.substr(kThinkingOpen.size(), close - kThinkingOpen.size()));
  if (thinking.empty())
    return ProtocolViolation{ViolationKind::missing_thinking, "empty <thinking> block"};

  const std::string_view rest = trim(s.substr(close + kThinkingClose.size()));
  const std::size_t questions = count_occurrences(rest, kQuestionOpen);
  const bool has_prefix =
      !final_prefix.empty() && rest.find(final_prefix) != std::string_view::npos;

  if (questions > 0 && has_prefix)
    return ProtocolViolation{ViolationKind::both_actions,
                             "reply contains both a question and a final answer"};
  if (questions > 1)
    return ProtocolViolation{ViolationKind::multiple_questions,
                             "reply contains " + std::to_string(questions) + " questions"};
  if (questions == 1) {
    if (!rest.starts_with(kQuestionOpen))
      return ProtocolViolation{ViolationKind::trailing_garbage,
                               "text between </thinking> and <question>"};
    const auto qclose = rest.find(kQuestionClose);
    if (qclose == std::string_view::npos)
      return ProtocolViolation{ViolationKind::no_action, "unterminated <question> block"};
    if (qclose + kQuestionClose.size() != rest.size())
      return ProtocolViolation{ViolationKind::trailing_garbage, "text after </question>"};
    const std::string_view q =
        trim(rest.substr(kQuestionOpen.size(), qclose - kQuestionOpen.size()));
    if (q.empty()) return ProtocolViolation{ViolationKind::no_action, "empty <question> block"};
    return ReasonerTurn{std::string(thinking), Question{std::string(q)}};
  }
  if (has_prefix) {
    if (!rest.starts_with(final_prefix))
      return ProtocolViolation{ViolationKind::trailing_garbage,
                               "text before the final-answer prefix"};
    const std::string_view answer = trim(rest.substr(final_prefix.size()));
    if (answer.empty())
      return ProtocolViolation{ViolationKind::no_action, "final-answer prefix with no answer"};
    return ReasonerTurn{std::string(thinking), Final{std::string(answer)}};
  }
  if (rest.empty())
    return ProtocolViolation{ViolationKind::no_action, "no question and no final answer"};
  return ProtocolViolation{ViolationKind::trailing_garbage,
                           "unrecognised text after </thinking>"};
}

inline std::string reasoner_task_message(std::string_view query, std::string_view metadata) {
  std::string m = "Query: ";
  m += query;
  m += "\nImage metadata: ";
  m += metadata;
  return m;
}

inline std::string corrective_note(const ProtocolViolation& v, std::string_view final_prefix) {
  return "Format error (" + std::string(to_string(v.kind)) + ": " + v.detail +
         "). Reply again: begin with <thinking>...</thinking>, then exactly one "
         "<question>...</question> or " + std::string(final_prefix) + " followed by the answer.";
}

inline std::string finalize_note(int budget, std::string_view final_prefix) {
  return "All " + std::to_string(budget) +
         " questioning rounds are used. Give the final answer now: begin with "
         "<thinking>...</thinking>, then output " + std::string(final_prefix) +
         " followed by the answer. Do not ask another question.";
}

namespace detail {

// Calls the backend, retrying transport failures up to `retry_limit` times.
inline std::optional<std::string> call_with_retry(ChatBackend& backend,
                                                  std::span<const Message> messages,
                                                  int retry_limit, std::string& last_error) {
  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    try {
      return backend.complete(messages);
    } catch (const BackendError& e) {
      last_error = e.what();
    }
  }
  return std::nullopt;
}

inline void fail(DialogueState& st, std::string reason) {
  st.status = DialogueStatus::failed;
  st.failure_reason = std::move(reason);
}

}  // namespace detail

/// Runs the Reasoner/Perceiver loop to a final answer or a failure. The
/// Reasoner never receives the image; the Perceiver receives only the image
/// and the current question.
inline DialogueState run_dialogue(std::string_view query, std::string_view image_ref,
                                  std::string_view metadata, ChatBackend& reasoner,
                                  ChatBackend& perceiver, const SocraticConfig& cfg) {
  cfg.validate();
  DialogueState st;
  st.task_query = std::string(query);
  st.image_metadata = std::string(metadata);

  std::vector<Message> history{
      {"system", cfg.effective_reasoner_prompt(), std::nullopt},
      {"user", reasoner_task_message(query, metadata), std::nullopt},
  };
  const std::string trimmed_query(rsreason::detail::trim(query));
  bool finalize_requested = false;

  for (int reasoner_turns = 0; reasoner_turns < cfg.max_loop; ++reasoner_turns) {
    if (st.question_rounds_used >= cfg.question_budget() && !finalize_requested) {
      history.push_back({"user", finalize_note(cfg.question_budget(), cfg.final_prefix), std::nullopt});
      finalize_requested = true;
    }

    std::vector<Message> scratch = history;
    std::string reply;
    ReasonerTurn turn;
    for (int violations = 0;; ++violations) {
      std::string err;
      auto text = detail::call_with_retry(reasoner, scratch, cfg.retry_limit, err);
      if (!text) {
        detail::fail(st, "transport: " + err);
        return st;
      }
      reply = std::move(*text);
      ReasonerParse parsed = parse_reasoner_turn(reply, cfg.final_prefix);
      if (auto* t = std::get_if<ReasonerTurn>(&parsed)) {
        const auto* q = std::get_if<Question>(&t->action);
        if (q && !trimmed_query.empty() && q->text.find(trimmed_query) != std::string::npos) {
          parsed = ProtocolViolation{ViolationKind::forwarded_query,
                                     "the question repeats the task query verbatim"};
        }
      }
      if (auto* t = std::get_if<ReasonerTurn>(&parsed)) {
        turn = std::move(*t);
        break;
      }
      const auto& v = std::get<ProtocolViolation>(parsed);
      if (violations >= cfg.retry_limit) {
        detail::fail(st, "protocol: " + std::string(to_string(v.kind)));
        return st;
      }
      ++st.retries_used;
      scratch.push_back({"assistant", reply, std::nullopt});
      scratch.push_back({"system", corrective_note(v, cfg.final_prefix), std::nullopt});
    }

    if (!turn.is_final() && finalize_requested) {
      detail::fail(st, "exceeded_rounds");
      return st;
    }
    history.push_back({"assistant", reply, std::nullopt});
    st.turns.emplace_back(turn);
    if (turn.is_final()) {
      st.status = DialogueStatus::final;
      return st;
    }

    const std::string& question = std::get<Question>(turn.action).text;
    std::vector<Message> pmsgs{
        {"system", cfg.perceiver_prompt, std::nullopt},
        {"user", question, std::string(image_ref)},
    };
    std::string answer;
    for (int violations = 0;; ++violations) {
      std::string err;
      auto text = detail::call_with_retry(perceiver, pmsgs, cfg.retry_limit, err);
      if (!text) {
        detail::fail(st, "transport: " + err);
        return st;
      }
      answer = std::string(rsreason::detail::trim(*text));
      if (answer.starts_with(kPerceiverOpening)) break;
      if (cfg.perceiver_opening_enforcement == OpeningEnforcement::warn) {
        st.warnings.push_back("round " + std::to_string(st.question_rounds_used + 1) +
                              ": perceiver reply does not open with \"" +
                              std::string(kPerceiverOpening) + "\"");
        break;
      }
      if (violations >= cfg.retry_limit) {
        detail::fail(st, "protocol: perceiver_opening");
        return st;
      }
      ++st.retries_used;
      pmsgs.push_back({"assistant", answer, std::nullopt});
      pmsgs.push_back({"system",
                       "Begin your response with: \"" + std::string(kPerceiverOpening) + "\"",
                       std::nullopt});
    }
    st.turns.emplace_back(PerceiverTurn{answer});
    ++st.question_rounds_used;
    history.push_back({"user", answer, std::nullopt});
  }
  detail::fail(st, "exceeded_rounds");
  return st;
}

inline std::string verifier_message(std::string_view query, std::string_view answer,
                                    std::string_view ground_truth) {
  std::string m = "Query: ";
  m += query;
  m += "\nAnswer: ";
  m += answer;
  m += "\nGT: ";
  m += ground_truth;
  return m;
}

/// "ACCEPT" (after trimming) accepts; "REJECT: reason" rejects with the
/// reason; anything else rejects as unparseable.
inline Verdict parse_verdict(std::string_view reply) {
  const std::string_view s = rsreason::detail::trim(reply);
  if (s == "ACCEPT") return {true, {}};
  constexpr std::string_view kReject = "REJECT:";
  if (s.starts_with(kReject)) {
    std::string reason(rsreason::detail::trim(s.substr(kReject.size())));
    if (reason.empty()) reason = "no reason given";
    return {false, std::move(reason)};
  }
  return {false, "unparseable verdict"};
}

inline Verdict verify(std::string_view final_answer, std::string_view ground_truth,
                      std::string_view query, ChatBackend& verifier,
                      const SocraticConfig& cfg = {}) {
  const std::vector<Message> msgs{
      {"system", cfg.verifier_prompt, std::nullopt},
      {"user", verifier_message(query, final_answer, ground_truth), std::nullopt},
  };
  std::string err;
  auto reply = detail::call_with_retry(verifier, msgs, cfg.retry_limit, err);
  if (!reply) return {false, "verifier unavailable"};
  return parse_verdict(*reply);
}

namespace detail {

inline std::string strip_think_tags(std::string s) {
  // Repeat: removing one tag can splice the pieces of another together.
  while (s.find(rsreason::kThinkOpen) != std::string::npos ||
         s.find(rsreason::kThinkClose) != std::string::npos) {
    replace_all(s, rsreason::kThinkOpen, "");
    replace_all(s, rsreason::kThinkClose, "");
  }
  return s;
}

}  // namespace detail

/// Renders a final dialogue as a single reasoning trace:
///   <think> {opening}
///   {thinking} {question}      one pair of lines per round
///   {perceiver answer}
///   {final thinking} {final answer}
///   </think> {final answer}
/// Stray think tags inside dialogue text are dropped so the trace holds
/// exactly one reasoning block.
inline std::string render_trace(const DialogueState& st, std::string_view final_answer) {
  if (st.status != DialogueStatus::final || st.final_turn() == nullptr)
    throw InvalidInput("render_trace: dialogue has not reached a final answer");
  using detail::strip_think_tags;
  std::string out;
  out += rsreason::kThinkOpen;
  out += ' ';
  out += kTraceOpening;
  for (const Turn& t : st.turns) {
    out += '\n';
    if (const auto* r = std::get_if<ReasonerTurn>(&t)) {
      const std::string& act = std::visit([](const auto& a) -> const std::string& { return a.text; },
                                          r->action);
      out += strip_think_tags(r->thinking + " " + act);
    } else {
      out += strip_think_tags(std::get<PerceiverTurn>(t).text);
    }
  }
  out += '\n';
  out += rsreason::kThinkClose;
  out += ' ';
  out += strip_think_tags(std::string(final_answer));
  return out;
}

inline std::string render_trace(const DialogueState& st) {
  return render_trace(st, st.final_answer());
}

}  // namespace rsreason::socratic
