#pragma once

// Response parsing for the reward functions: think-block splitting, first
// bounding-box extraction and answer-letter extraction. Every function here
// is total over arbitrary byte strings.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace rsreason {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

struct RawResponse {
  std::string text;
};

struct ThinkSplit {
  bool well_formed = false;
  std::optional<std::string> think_body;
  std::string tail;

  friend bool operator==(const ThinkSplit&, const ThinkSplit&) = default;
};

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  // Swaps corners so that x1 <= x2 and y1 <= y2.
  [[nodiscard]] BBox canonical() const {
    BBox b = *this;
    if (b.x1 > b.x2) std::swap(b.x1, b.x2);
    if (b.y1 > b.y2) std::swap(b.y1, b.y2);
    return b;
  }
  [[nodiscard]] bool is_canonical() const { return x1 <= x2 && y1 <= y2; }
  [[nodiscard]] bool is_finite() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2);
  }
  [[nodiscard]] double area() const {
    return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// A set of option letters 'A'..'Z', stored as a bitmask.
class LetterSet {
 public:
  constexpr LetterSet() = default;

  static constexpr LetterSet first_n(int n) {
    LetterSet s;
    if (n <= 0) return s;
    if (n >= 26) n = 26;
    s.bits_ = (n == 26) ? kAll : ((std::uint32_t{1} << n) - 1);
    return s;
  }

  // Accepts 'A'..'Z' and 'a'..'z'; returns false for anything else.
  constexpr bool insert(char c) {
    const int i = index_of(c);
    if (i < 0) return false;
    bits_ |= std::uint32_t{1} << i;
    return true;
  }
  [[nodiscard]] constexpr bool contains(char c) const {
    const int i = index_of(c);
    return i >= 0 && ((bits_ >> i) & 1U) != 0;
  }
  [[nodiscard]] constexpr int size() const { return std::popcount(bits_); }
  [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
  [[nodiscard]] constexpr std::uint32_t bits() const { return bits_; }

  // Contiguous from 'A' with no gaps.
  [[nodiscard]] constexpr bool is_prefix_range() const {
    return bits_ != 0 && (bits_ & (bits_ + 1)) == 0;
  }
  [[nodiscard]] constexpr bool is_subset_of(LetterSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  [[nodiscard]] constexpr LetterSet minus(LetterSet other) const {
    LetterSet s;
    s.bits_ = bits_ & ~other.bits_;
    return s;
  }

  // Letters in alphabetical order, e.g. "ACD".
  [[nodiscard]] std::string str() const {
    std::string out;
    for (int i = 0; i < 26; ++i)
      if ((bits_ >> i) & 1U) out.push_back(static_cast<char>('A' + i));
    return out;
  }

  static LetterSet from_string(std::string_view letters) {
    LetterSet s;
    for (char c : letters) s.insert(c);
    return s;
  }

  friend constexpr bool operator==(LetterSet, LetterSet) = default;

 private:
  static constexpr std::uint32_t kAll = (std::uint32_t{1} << 26) - 1;
  static constexpr int index_of(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a';
    return -1;
  }
  std::uint32_t bits_ = 0;
};

// selection: a line with letter tokens was found. empty: the tail has no
// letter tokens, which selects nothing. invalid: there is no tail at all
// because the response has no well-formed reasoning block.
enum class OutcomeKind { selection, empty, invalid };

struct ParseOutcome {
  OutcomeKind kind = OutcomeKind::empty;
  std::optional<LetterSet> letters;
  bool contains_foreign = false;

  friend bool operator==(const ParseOutcome&, const ParseOutcome&) = default;
};

namespace detail {

constexpr bool is_ascii_alpha(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}
constexpr bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
constexpr bool is_ascii_alnum(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c);
}
constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Matches [+-]?\d+(\.\d+)? at `pos`; on success advances `pos`.
inline std::optional<double> match_decimal(std::string_view s,
                                           std::size_t& pos) {
  std::size_t i = pos;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  const std::size_t digits_begin = i;
  while (i < s.size() && is_ascii_digit(s[i])) ++i;
  if (i == digits_begin) return std::nullopt;
  if (i + 1 < s.size() && s[i] == '.' && is_ascii_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_ascii_digit(s[i])) ++i;
  }
  // from_chars rejects a leading '+'.
  std::size_t first = pos;
  if (s[first] == '+') ++first;
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(s.data() + first, s.data() + i, value);
  if (ec != std::errc{} || ptr != s.data() + i || !std::isfinite(value))
    return std::nullopt;
  pos = i;
  return value;
}

// Separator: ',' | whitespace+ | ',' whitespace+
inline bool match_separator(std::string_view s, std::size_t& pos) {
  std::size_t i = pos;
  if (i < s.size() && s[i] == ',') {
    ++i;
    while (i < s.size() && is_space(s[i])) ++i;
    pos = i;
    return true;
  }
  const std::size_t ws_begin = i;
  while (i < s.size() && is_space(s[i])) ++i;
  if (i == ws_begin) return false;
  pos = i;
  return true;
}

inline std::optional<BBox> match_bbox_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || s[pos] != '[') return std::nullopt;
  ++pos;
  std::array<double, 4> v{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (k > 0 && !match_separator(s, pos)) return std::nullopt;
    const auto d = match_decimal(s, pos);
    if (!d) return std::nullopt;
    v[k] = *d;
  }
  if (pos >= s.size() || s[pos] != ']') return std::nullopt;
  return BBox{v[0], v[1], v[2], v[3]}.canonical();
}

// Independent letter tokens in one line: single ASCII letters whose
// neighbours are not ASCII alphanumerics (or are the line boundary).
inline LetterSet letter_tokens(std::string_view line) {
  LetterSet found;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (!is_ascii_alpha(line[i])) continue;
    const bool left_ok = i == 0 || !is_ascii_alnum(line[i - 1]);
    const bool right_ok = i + 1 == line.size() || !is_ascii_alnum(line[i + 1]);
    if (left_ok && right_ok) found.insert(line[i]);
  }
  return found;
}

}  // namespace detail

/// Splits a response around its reasoning block. The response is well formed
/// when the first opening tag precedes the last closing tag; the tail is the
/// text after the last closing tag. The body is the text inside the first
/// matched pair.
inline ThinkSplit split_think(std::string_view response) {
  const auto open = response.find(kThinkOpen);
  const auto last_close = response.rfind(kThinkClose);
  if (open == std::string_view::npos || last_close == std::string_view::npos ||
      open + kThinkOpen.size() > last_close) {
    return ThinkSplit{};
  }
  const auto body_begin = open + kThinkOpen.size();
  const auto first_close = response.find(kThinkClose, body_begin);
  ThinkSplit out;
  out.well_formed = true;
  out.think_body =
      std::string(response.substr(body_begin, first_close - body_begin));
  out.tail = std::string(response.substr(last_close + kThinkClose.size()));
  return out;
}

inline ThinkSplit split_think(const RawResponse& r) { return split_think(r.text); }

/// First `[x1, y1, x2, y2]` list in `tail`, with corners put in canonical
/// order. Separators may be a comma, whitespace, or a comma plus whitespace.
inline std::optional<BBox> extract_bbox(std::string_view tail) {
  for (auto pos = tail.find('['); pos != std::string_view::npos;
       pos = tail.find('[', pos + 1)) {
    if (auto box = detail::match_bbox_at(tail, pos)) return box;
  }
  return std::nullopt;
}

/// Letters from the last line of `tail` that holds at least one independent
/// letter token. `allowed` decides only `contains_foreign`.
inline ParseOutcome extract_letters(std::string_view tail, LetterSet allowed) {
  std::size_t end = tail.size();
  while (true) {
    const auto nl = end == 0 ? std::string_view::npos : tail.rfind('\n', end - 1);
    const std::size_t begin = nl == std::string_view::npos ? 0 : nl + 1;
    const LetterSet found = detail::letter_tokens(tail.substr(begin, end - begin));
    if (!found.empty()) {
      return ParseOutcome{OutcomeKind::selection, found,
                          !found.is_subset_of(allowed)};
    }
    if (nl == std::string_view::npos) break;
    end = nl;
  }
  return ParseOutcome{};
}

/// Letter parse of a whole response: invalid when the reasoning block is
/// missing, otherwise extract_letters over the tail.
inline ParseOutcome parse_answer_letters(std::string_view response,
                                         LetterSet allowed) {
  const ThinkSplit split = split_think(response);
  if (!split.well_formed) return ParseOutcome{OutcomeKind::invalid, {}, false};
  return extract_letters(split.tail, allowed);
}

}  // namespace rsreason
