// Copyright 2026 The ADML-KWS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adml/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "adml/core/types.hpp"

namespace adml {

namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts count_labels(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw StructuralError("metrics: scores and labels differ in length");
  Counts c;
  for (bool l : labels) (l ? c.pos : c.neg)++;
  return c;
}

void require_both(const Counts& c, const char* op) {
  if (c.pos == 0 || c.neg == 0) throw DomainError(std::string(op) + ": need at least one positive and one negative");
}

double cross(const RocPoint& o, const RocPoint& a, const RocPoint& b) {
  return (a.far - o.far) * (b.frr - o.frr) - (a.frr - o.frr) * (b.far - o.far);
}

}  // namespace

double average_precision(std::span<const double> scores, const std::vector<bool>& labels) {
  const Counts c = count_labels(scores, labels);
  if (c.pos == 0) throw DomainError("average_precision: no positive trials");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (labels[a] != labels[b]) return !labels[a];  // negatives first within a tie
    return a < b;
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  return sum / static_cast<double>(c.pos);
}

std::vector<RocPoint> roc_points(std::span<const double> scores, const std::vector<bool>& labels) {
  const Counts c = count_labels(scores, labels);
  require_both(c, "roc_points");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<RocPoint> pts;
  // Sweep thresholds upward; below the current threshold everything is rejected.
  std::size_t rejected_pos = 0;
  std::size_t rejected_neg = 0;
  const double np = static_cast<double>(c.pos);
  const double nn = static_cast<double>(c.neg);
  std::size_t i = 0;
  while (i < order.size()) {
    pts.push_back({static_cast<double>(c.neg - rejected_neg) / nn, static_cast<double>(rejected_pos) / np});
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? rejected_pos : rejected_neg)++;
      ++i;
    }
  }
  pts.push_back({0.0, 1.0});
  return pts;
}

double diagonal_crossing(const RocPoint& p, const RocPoint& q) {
  const double dp = p.far - p.frr;
  const double dq = q.far - q.frr;
  if (dp == dq) return p.far;
  const double t = dp / (dp - dq);
  return p.far + t * (q.far - p.far);
}

double eer(std::span<const double> scores, const std::vector<bool>& labels) {
  std::vector<RocPoint> pts = roc_points(scores, labels);
  std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    if (a.far != b.far) return a.far < b.far;
    return a.frr > b.frr;
  });
  std::vector<RocPoint> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
    hull.push_back(p);
  }
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const double dp = hull[k].far - hull[k].frr;
    const double dq = hull[k + 1].far - hull[k + 1].frr;
    if (dp <= 0.0 && dq >= 0.0) return diagonal_crossing(hull[k], hull[k + 1]);
  }
  return hull.back().far;  // unreachable: the hull runs from (0, 1) to (1, 0)
}

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  const Counts c = count_labels(scores, labels);
  require_both(c, "auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double wins = 0.0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::size_t pos_tie = 0;
    std::size_t neg_tie = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? pos_tie : neg_tie)++;
      ++i;
    }
    wins += static_cast<double>(pos_tie) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg_tie));
    neg_below += neg_tie;
  }
  return wins / (static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

}  // namespace adml
