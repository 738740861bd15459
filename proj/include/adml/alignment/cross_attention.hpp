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

#ifndef ADML_ALIGNMENT_CROSS_ATTENTION_HPP_
#define ADML_ALIGNMENT_CROSS_ATTENTION_HPP_

#include "adml/autodiff/graph.hpp"
#include "adml/core/types.hpp"

namespace adml {

// Text embeddings are the queries, audio embeddings the keys and values.
struct AffinityResult {
  Matrix affinity;    // T_t x T_a, row-stochastic
  Matrix aggregated;  // T_t x d, affinity * audio
};

struct AttentionVars {
  ad::Var affinity;
  ad::Var aggregated;
};

// A = softmax_rows(E_t E_a^T / sqrt(d)), aggregated = A E_a.
AttentionVars cross_attend(ad::Var text, ad::Var audio);
AffinityResult cross_attend(const Matrix& text, const Matrix& audio);

// Row-normalised Gaussian band around j* = i (T_a - 1) / max(T_t - 1, 1) with standard
// deviation width_ratio * T_a. width_ratio = 0 degenerates to a one-hot diagonal.
Matrix monotonic_target(Eigen::Index text_len, Eigen::Index audio_len, double width_ratio);

// Mean squared error between A and the monotonic target for matching pairs; exactly 0 for
// non-matching pairs. Throws ContractViolation when a row of A does not sum to 1 (tol 1e-4).
ad::Var monotonic_matching_loss(ad::Var affinity, bool is_match, double width_ratio);
double monotonic_matching_loss(const Matrix& affinity, bool is_match, double width_ratio = 0.1);

}  // namespace adml

#endif  // ADML_ALIGNMENT_CROSS_ATTENTION_HPP_
