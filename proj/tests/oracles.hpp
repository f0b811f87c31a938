#pragma once

// Reference computations for tests. These deliberately take different
// routes from the library: per-option counting for the MCQ accuracy,
// unit-cell enumeration for IoU, and direct recounts for the metrics.

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// (correct options selected + incorrect options left out) / N
inline double mcq_accuracy(const std::set<char>& gt, const std::set<char>& pred, int n) {
  int credit = 0;
  for (int i = 0; i < n; ++i) {
    const char c = static_cast<char>('A' + i);
    const bool is_correct = gt.count(c) > 0;
    const bool chosen = pred.count(c) > 0;
    if (is_correct && chosen) ++credit;
    if (!is_correct && !chosen) ++credit;
  }
  return static_cast<double>(credit) / n;
}

struct IntBox {
  int x1, y1, x2, y2;
};

// IoU of integer boxes by counting the unit cells each box covers.
inline double iou_by_cells(IntBox a, IntBox b) {
  const int lo_x = std::min(a.x1, b.x1), hi_x = std::max(a.x2, b.x2);
  const int lo_y = std::min(a.y1, b.y1), hi_y = std::max(a.y2, b.y2);
  long inter = 0, uni = 0;
  for (int x = lo_x; x < hi_x; ++x) {
    for (int y = lo_y; y < hi_y; ++y) {
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += (in_a && in_b) ? 1 : 0;
      uni += (in_a || in_b) ? 1 : 0;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// VQA recount from a correctness matrix built by the test generator.
struct VqaCounts {
  double avg, conv, pass;
};

inline VqaCounts vqa_recount(const std::vector<std::vector<bool>>& correct) {
  double total_correct = 0, majority = 0, any = 0;
  std::size_t k = correct.empty() ? 0 : correct.front().size();
  for (const auto& row : correct) {
    int c = 0;
    bool hit = false;
    for (bool b : row) {
      if (b) {
        ++c;
        hit = true;
      }
    }
    total_correct += c;
    if (static_cast<double>(c) > static_cast<double>(k) / 2.0) majority += 1;
    if (hit) any += 1;
  }
  const double n = static_cast<double>(correct.size());
  return {total_correct / (n * static_cast<double>(k)), majority / n, any / n};
}

}  // namespace oracle
