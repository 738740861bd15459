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

#ifndef ADML_CORE_BATCH_HPP_
#define ADML_CORE_BATCH_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "adml/core/types.hpp"

namespace adml {

// A mini-batch of (audio features, phoneme ids, keyword class) triples with ragged lengths.
struct PhonemeBatch {
  std::vector<Matrix> audio_features;        // each T_a x F
  std::vector<std::vector<int>> phoneme_ids;  // each length T_t
  std::vector<int> keyword_ids;

  std::size_t size() const { return keyword_ids.size(); }

  // Throws StructuralError / DomainError when any invariant is broken:
  // equal field lengths, T_a >= T_t >= 1, feature width, phoneme ids < vocab.
  void validate(int vocab_size, int feature_dim) const;
};

// Per-utterance embedding sequences, each T_i x d.
struct RaggedEmbeddings {
  std::vector<Matrix> values;

  std::size_t size() const { return values.size(); }
  std::vector<int> lengths() const;
};

// Batch-major concatenation of ragged rows with one phoneme label per row.
struct FlatEmbeddings {
  Matrix matrix;
  std::vector<int> labels;

  Eigen::Index rows() const { return matrix.rows(); }
};

// Concatenates utterance 0's rows, then utterance 1's, ... Labels follow the same order.
FlatEmbeddings ragged_flatten(const RaggedEmbeddings& embs, const std::vector<std::vector<int>>& labels);

// Inverse of ragged_flatten for a given length profile.
RaggedEmbeddings ragged_unflatten(const FlatEmbeddings& flat, std::span<const int> lengths);

// Cosine similarity. A zero-norm argument is a DomainError, never a silent 0.
double cosine_sim(const Eigen::Ref<const RowVector>& u, const Eigen::Ref<const RowVector>& v);

// Entry (i, j) = cosine_sim(a.row(i), b.row(j)).
Matrix pairwise_cosine(const Matrix& a, const Matrix& b);

}  // namespace adml

#endif  // ADML_CORE_BATCH_HPP_
