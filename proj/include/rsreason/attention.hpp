#pragma once

// Image-attention proportion per generated token, Gaussian smoothing, and
// segmentation of the curve into evidence-seeking peaks and reasoning gaps.

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rsreason/errors.hpp"

namespace rsreason {

// Row t holds `axes` blocks of L_t weights each (head/layer-major), where
// L_t is the context length at step t. The image mask covers the longest
// context; step t uses its first L_t entries.
struct AttentionDump {
  int axes = 1;
  std::vector<bool> image_mask;
  std::vector<std::vector<double>> rows;
};

using AttentionSeries = std::vector<double>;

enum class Phase { evidence_seeking, reasoning };

inline std::string_view to_string(Phase p) {
  return p == Phase::evidence_seeking ? "evidence_seeking" : "reasoning";
}

struct PhaseSegment {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  Phase label = Phase::reasoning;

  friend bool operator==(const PhaseSegment&, const PhaseSegment&) = default;
};

struct PhaseSegmentation {
  std::vector<std::size_t> peaks;
  std::vector<double> prominences;
  std::vector<PhaseSegment> segments;
};

/// Share of each token's attention that lands on image positions, after
/// averaging the head/layer axes.
inline AttentionSeries attn_proportion(const AttentionDump& dump) {
  if (dump.axes < 1) throw InvalidInput("attention dump: axes must be positive");
  const auto axes = static_cast<std::size_t>(dump.axes);
  AttentionSeries out;
  out.reserve(dump.rows.size());
  for (std::size_t t = 0; t < dump.rows.size(); ++t) {
    const auto& row = dump.rows[t];
    const std::string where = "attention dump row " + std::to_string(t);
    if (row.empty() || row.size() % axes != 0)
      throw InvalidInput(where + ": length " + std::to_string(row.size()) +
                         " is not a positive multiple of axes=" + std::to_string(axes));
    const std::size_t ctx = row.size() / axes;
    if (ctx > dump.image_mask.size())
      throw InvalidInput(where + ": context length " + std::to_string(ctx) +
                         " exceeds mask length " + std::to_string(dump.image_mask.size()));
    double image = 0, total = 0;
    for (std::size_t j = 0; j < ctx; ++j) {
      double w = 0;
      for (std::size_t a = 0; a < axes; ++a) {
        const double v = row[a * ctx + j];
        if (!std::isfinite(v) || v < 0)
          throw InvalidInput(where + ": weights must be finite and non-negative");
        w += v;
      }
      w /= static_cast<double>(axes);
      total += w;
      if (dump.image_mask[j]) image += w;
    }
    if (!(total > 0)) throw InvalidInput(where + ": all-zero attention weights");
    out.push_back(std::clamp(image / total, 0.0, 1.0));
  }
  return out;
}

namespace detail {

// Mirror index into [0, n) with the edge sample repeated (d c b a | a b c d).
inline std::size_t reflect_index(long long i, std::size_t n) {
  const auto period = static_cast<long long>(2 * n);
  long long m = ((i % period) + period) % period;
  if (m >= static_cast<long long>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

}  // namespace detail

/// Discrete Gaussian convolution, kernel truncated at 4 sigma, reflect
/// padding, output clamped to [0, 1].
inline AttentionSeries smooth(const AttentionSeries& series, double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma))
    throw InvalidInput("smooth: sigma must be positive");
  if (series.empty()) throw InvalidInput("smooth: empty series");
  const auto radius = static_cast<long long>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0;
  for (long long k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    norm += v;
  }
  for (double& v : kernel) v /= norm;

  const std::size_t n = series.size();
  AttentionSeries out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (long long k = -radius; k <= radius; ++k) {
      const auto src = detail::reflect_index(static_cast<long long>(i) + k, n);
      acc += kernel[static_cast<std::size_t>(k + radius)] * series[src];
    }
    out[i] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

/// Interior local maxima; a flat top counts once, at its middle sample.
inline std::vector<std::size_t> local_maxima(const AttentionSeries& x) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead + 1 < n && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
      i = ahead;
      continue;
    }
    ++i;
  }
  return peaks;
}

/// Height of a peak above the higher of the two lowest points reachable on
/// either side before meeting a taller sample.
inline double prominence(const AttentionSeries& x, std::size_t peak) {
  const double h = x[peak];
  double left_min = h;
  for (std::size_t i = peak + 1; i-- > 0;) {
    if (x[i] > h) break;
    left_min = std::min(left_min, x[i]);
  }
  double right_min = h;
  for (std::size_t i = peak; i < x.size(); ++i) {
    if (x[i] > h) break;
    right_min = std::min(right_min, x[i]);
  }
  return h - std::max(left_min, right_min);
}

/// Peaks with prominence >= min_prominence. Each peak's evidence-seeking
/// region is the run of samples above half its prominence; overlapping
/// regions merge, and the remaining gaps are reasoning.
inline PhaseSegmentation segment_phases(const AttentionSeries& series,
                                        double min_prominence) {
  PhaseSegmentation seg;
  const std::size_t n = series.size();
  if (n == 0) return seg;

  std::vector<std::pair<std::size_t, std::size_t>> regions;
  for (std::size_t p : local_maxima(series)) {
    const double prom = prominence(series, p);
    if (prom < min_prominence || !(prom > 0)) continue;
    seg.peaks.push_back(p);
    seg.prominences.push_back(prom);
    const double threshold = series[p] - prom / 2.0;
    std::size_t lo = p, hi = p + 1;
    while (lo > 0 && series[lo - 1] > threshold) --lo;
    while (hi < n && series[hi] > threshold) ++hi;
    // A tall later peak can reach back over several earlier regions.
    while (!regions.empty() && lo <= regions.back().second) {
      lo = std::min(lo, regions.back().first);
      hi = std::max(hi, regions.back().second);
      regions.pop_back();
    }
    regions.emplace_back(lo, hi);
  }

  std::size_t cursor = 0;
  for (const auto& [lo, hi] : regions) {
    if (lo > cursor) seg.segments.push_back({cursor, lo, Phase::reasoning});
    seg.segments.push_back({lo, hi, Phase::evidence_seeking});
    cursor = hi;
  }
  if (cursor < n) seg.segments.push_back({cursor, n, Phase::reasoning});
  return seg;
}

/// Text dump reader. Lines: `# comment`, `axes A`, `mask b0 b1 ...`, and
/// one `w v0 v1 ...` per generated token.
inline AttentionDump parse_attention_dump(std::istream& in) {
  AttentionDump dump;
  bool have_mask = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    const std::string where = "line " + std::to_string(lineno);
    if (key == "axes") {
      if (!(ls >> dump.axes) || dump.axes < 1)
        throw InvalidInput(where + ": bad axes value");
    } else if (key == "mask") {
      if (have_mask) throw InvalidInput(where + ": duplicate mask row");
      std::string tok;
      while (ls >> tok) {
        if (tok != "0" && tok != "1")
          throw InvalidInput(where + ": mask entries must be 0 or 1");
        dump.image_mask.push_back(tok == "1");
      }
      have_mask = true;
    } else if (key == "w") {
      std::vector<double> row;
      std::string tok;
      while (ls >> tok) {
        try {
          std::size_t used = 0;
          row.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw InvalidInput(where + ": bad weight '" + tok + "'");
        }
      }
      dump.rows.push_back(std::move(row));
    } else {
      throw InvalidInput(where + ": unknown row kind '" + key + "'");
    }
  }
  if (!have_mask) throw InvalidInput("attention dump: missing mask row");
  return dump;
}

}  // namespace rsreason
