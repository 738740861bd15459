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

#ifndef ADML_EVAL_METRICS_HPP_
#define ADML_EVAL_METRICS_HPP_

#include <span>
#include <vector>

namespace adml {

// Mean over positives of precision at the positive's rank (scores sorted descending).
// Tied scores rank negatives first. Throws DomainError without positives.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels);

// Operating points (false-accept rate, false-reject rate) for "accept if score >= threshold"
// at every distinct score, plus the accept-nothing point.
struct RocPoint {
  double far = 0.0;
  double frr = 0.0;
};
std::vector<RocPoint> roc_points(std::span<const double> scores, const std::vector<bool>& labels);

// Equal-error rate on the convex hull of the operating points: the hull segment straddling
// far == frr is interpolated linearly. Throws DomainError unless both labels occur.
double eer(std::span<const double> scores, const std::vector<bool>& labels);

// Probability that a random positive outscores a random negative, ties counted 1/2.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

// Crossing of segment p -> q with the line far == frr. Shared by eer() and its test oracle.
double diagonal_crossing(const RocPoint& p, const RocPoint& q);

}  // namespace adml

#endif  // ADML_EVAL_METRICS_HPP_
