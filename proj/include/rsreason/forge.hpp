#pragma once

// Multiple-choice reconstruction of simple VQA data: one image with m
// question/answer pairs becomes a single "which pairs match" question in
// which n of the answers have been made wrong.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsreason/errors.hpp"
#include "rsreason/parse.hpp"
#include "rsreason/rng.hpp"

namespace rsreason {

inline constexpr std::string_view kMCQQuery =
    "Which of the following QA pairs match this remote sensing image?";

// Open bounds on the option count: 10 < m < 15.
inline constexpr int kMinPairsExclusive = 10;
inline constexpr int kMaxPairsExclusive = 15;

enum class AnswerKind { yesno, numeric, other };

inline std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::yesno: return "yesno";
    case AnswerKind::numeric: return "numeric";
    case AnswerKind::other: return "other";
  }
  return "other";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Base-10 integer with optional sign, nothing else.
inline std::optional<std::int64_t> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t first = 0;
  if (s[0] == '+' || s[0] == '-') first = 1;
  if (first == s.size()) return std::nullopt;
  for (std::size_t i = first; i < s.size(); ++i)
    if (!is_ascii_digit(s[i])) return std::nullopt;
  std::int64_t v = 0;
  const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline AnswerKind classify_answer(std::string_view answer) {
  const std::string norm = detail::ascii_lower(detail::trim(answer));
  if (norm == "yes" || norm == "no") return AnswerKind::yesno;
  if (detail::parse_integer(norm)) return AnswerKind::numeric;
  return AnswerKind::other;
}

struct QAPair {
  std::string question;
  std::string answer;
  AnswerKind kind = AnswerKind::other;

  QAPair() = default;
  QAPair(std::string q, std::string a)
      : question(std::move(q)), answer(std::move(a)), kind(classify_answer(answer)) {}

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct VQAGroup {
  std::string image_id;
  std::string image_ref;
  std::vector<QAPair> pairs;
};

struct ForgeConfig {
  int target_m_max = 14;
  int numeric_delta_min = 1;
  int numeric_delta_max = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(target_m_max > kMinPairsExclusive && target_m_max < kMaxPairsExclusive))
      throw InvalidInput("target_m_max must satisfy 10 < m < 15");
    if (numeric_delta_min < 1 || numeric_delta_max < numeric_delta_min)
      throw InvalidInput("numeric delta range must be positive and non-empty");
  }
};

struct MCQOption {
  char letter = 'A';
  std::string question;
  std::string answer;
  bool inverted = false;

  friend bool operator==(const MCQOption&, const MCQOption&) = default;
};

struct MCQSample {
  std::string image_id;
  std::string image_ref;
  std::string query{kMCQQuery};
  std::vector<MCQOption> options;
  LetterSet gt_letters;

  [[nodiscard]] int n_inverted() const {
    return static_cast<int>(std::count_if(options.begin(), options.end(),
                                          [](const MCQOption& o) { return o.inverted; }));
  }
  [[nodiscard]] LetterSet allowed() const {
    return LetterSet::first_n(static_cast<int>(options.size()));
  }

  friend bool operator==(const MCQSample&, const MCQSample&) = default;
};

struct ForgeSkip {
  std::string reason;
};

using ForgeResult = std::variant<MCQSample, ForgeSkip>;

/// Makes a pair's answer wrong: yes and no swap, integers move by a signed
/// random delta. A non-negative count stays non-negative.
inline QAPair invert_answer(const QAPair& pair, Rng& rng,
                            const ForgeConfig& cfg = {}) {
  const std::string_view trimmed = detail::trim(pair.answer);
  QAPair out = pair;
  switch (classify_answer(pair.answer)) {
    case AnswerKind::yesno: {
      const bool is_yes = detail::ascii_lower(trimmed) == "yes";
      const bool upper = trimmed == "YES" || trimmed == "NO";
      const bool title = !upper && (trimmed == "Yes" || trimmed == "No");
      if (upper) out.answer = is_yes ? "NO" : "YES";
      else if (title) out.answer = is_yes ? "No" : "Yes";
      else out.answer = is_yes ? "no" : "yes";
      break;
    }
    case AnswerKind::numeric: {
      const std::int64_t original = *detail::parse_integer(trimmed);
      constexpr auto lo = std::numeric_limits<std::int64_t>::min();
      constexpr auto hi = std::numeric_limits<std::int64_t>::max();
      while (true) {
        const auto d = uniform_int(rng, cfg.numeric_delta_min, cfg.numeric_delta_max);
        const bool plus = uniform_below(rng, 2) == 0;
        const __int128 candidate =
            static_cast<__int128>(original) + (plus ? d : -d);
        if (candidate < lo || candidate > hi) continue;
        if (original >= 0 && candidate < 0) continue;
        if (candidate == original) continue;
        out.answer = std::to_string(static_cast<std::int64_t>(candidate));
        break;
      }
      break;
    }
    case AnswerKind::other:
      throw NotInvertible("answer is neither yes/no nor an integer: '" +
                          std::string(trimmed) + "'");
  }
  out.kind = classify_answer(out.answer);
  return out;
}

/// Builds one multiple-choice sample from a group, or says why it cannot.
/// Draw order: subsample, n, inverted subset, answer perturbations, shuffle.
inline ForgeResult forge_mcq(const VQAGroup& group, const ForgeConfig& cfg,
                             Rng& rng) {
  cfg.validate();
  const auto total = group.pairs.size();
  if (total <= static_cast<std::size_t>(kMinPairsExclusive))
    return ForgeSkip{"too few pairs"};

  std::vector<std::size_t> chosen;
  if (total > static_cast<std::size_t>(cfg.target_m_max)) {
    chosen = sample_indices(rng, total, static_cast<std::size_t>(cfg.target_m_max));
    std::sort(chosen.begin(), chosen.end());
  } else {
    chosen.resize(total);
    for (std::size_t i = 0; i < total; ++i) chosen[i] = i;
  }
  const auto m = static_cast<std::int64_t>(chosen.size());

  std::vector<std::size_t> invertible;  // positions within `chosen`
  for (std::size_t i = 0; i < chosen.size(); ++i)
    if (group.pairs[chosen[i]].kind != AnswerKind::other) invertible.push_back(i);
  if (invertible.size() < 2) return ForgeSkip{"too few invertible"};

  auto n = static_cast<std::size_t>(uniform_int(rng, 2, m - 1));
  n = std::min(n, invertible.size());

  std::vector<bool> flip(chosen.size(), false);
  for (std::size_t k : sample_indices(rng, invertible.size(), n))
    flip[invertible[k]] = true;

  std::vector<MCQOption> options;
  options.reserve(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const QAPair& src = group.pairs[chosen[i]];
    MCQOption opt;
    opt.question = src.question;
    if (flip[i]) {
      opt.answer = invert_answer(src, rng, cfg).answer;
      opt.inverted = true;
    } else {
      opt.answer = src.answer;
    }
    options.push_back(std::move(opt));
  }
  shuffle(options, rng);

  MCQSample sample;
  sample.image_id = group.image_id;
  sample.image_ref = group.image_ref;
  for (std::size_t i = 0; i < options.size(); ++i) {
    options[i].letter = static_cast<char>('A' + i);
    if (!options[i].inverted) sample.gt_letters.insert(options[i].letter);
  }
  sample.options = std::move(options);
  return sample;
}

/// Seeds a per-group stream from (cfg.seed, image_id).
inline ForgeResult forge_mcq(const VQAGroup& group, const ForgeConfig& cfg) {
  Rng rng = stream_for(cfg.seed, group.image_id);
  return forge_mcq(group, cfg, rng);
}

}  // namespace rsreason
