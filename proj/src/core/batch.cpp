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

#include "adml/core/batch.hpp"

#include <string>

namespace adml {

void PhonemeBatch::validate(int vocab_size, int feature_dim) const {
  if (audio_features.size() != keyword_ids.size() || phoneme_ids.size() != keyword_ids.size()) {
    throw StructuralError("PhonemeBatch: audio, phoneme and keyword lists differ in length");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& a = audio_features[i];
    const auto& t = phoneme_ids[i];
    if (t.empty()) throw StructuralError("PhonemeBatch: empty phoneme sequence at item " + std::to_string(i));
    if (a.rows() < static_cast<Eigen::Index>(t.size())) {
      throw StructuralError("PhonemeBatch: item " + std::to_string(i) + " has fewer audio frames than phonemes");
    }
    if (a.cols() != feature_dim) {
      throw StructuralError("PhonemeBatch: item " + std::to_string(i) + " has feature dim " +
                            std::to_string(a.cols()) + ", expected " + std::to_string(feature_dim));
    }
    for (int p : t) {
      if (p < 0 || p >= vocab_size) {
        throw DomainError("PhonemeBatch: phoneme id " + std::to_string(p) + " out of range at item " +
                          std::to_string(i));
      }
    }
  }
}

std::vector<int> RaggedEmbeddings::lengths() const {
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(static_cast<int>(v.rows()));
  return out;
}

FlatEmbeddings ragged_flatten(const RaggedEmbeddings& embs, const std::vector<std::vector<int>>& labels) {
  if (embs.size() != labels.size()) {
    throw StructuralError("ragged_flatten: " + std::to_string(embs.size()) + " sequences but " +
                          std::to_string(labels.size()) + " label lists");
  }
  Eigen::Index total = 0;
  Eigen::Index dim = -1;
  for (std::size_t i = 0; i < embs.size(); ++i) {
    const auto& v = embs.values[i];
    if (v.rows() != static_cast<Eigen::Index>(labels[i].size())) {
      throw StructuralError("ragged_flatten: sequence " + std::to_string(i) + " has " + std::to_string(v.rows()) +
                            " rows but " + std::to_string(labels[i].size()) + " labels");
    }
    if (dim >= 0 && v.cols() != dim) throw StructuralError("ragged_flatten: inconsistent embedding dimension");
    dim = v.cols();
    total += v.rows();
  }
  FlatEmbeddings out;
  out.matrix.resize(total, dim < 0 ? 0 : dim);
  out.labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < embs.size(); ++i) {
    const auto& v = embs.values[i];
    out.matrix.middleRows(r, v.rows()) = v;
    r += v.rows();
    out.labels.insert(out.labels.end(), labels[i].begin(), labels[i].end());
  }
  return out;
}

RaggedEmbeddings ragged_unflatten(const FlatEmbeddings& flat, std::span<const int> lengths) {
  RaggedEmbeddings out;
  Eigen::Index r = 0;
  for (int len : lengths) {
    if (len < 0 || r + len > flat.rows()) throw StructuralError("ragged_unflatten: lengths exceed row count");
    out.values.emplace_back(flat.matrix.middleRows(r, len));
    r += len;
  }
  if (r != flat.rows()) throw StructuralError("ragged_unflatten: lengths do not cover all rows");
  return out;
}

double cosine_sim(const Eigen::Ref<const RowVector>& u, const Eigen::Ref<const RowVector>& v) {
  if (u.size() != v.size()) throw StructuralError("cosine_sim: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine_sim: zero-norm input");
  return u.dot(v) / (nu * nv);
}

namespace {

Matrix normalized_rows(const Matrix& m, const char* which) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0) {
      throw DomainError(std::string("pairwise_cosine: row ") + std::to_string(i) + " of " + which + " has zero norm");
    }
    out.row(i) = m.row(i) / n;
  }
  return out;
}

}  // namespace

Matrix pairwise_cosine(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw StructuralError("pairwise_cosine: dimension mismatch");
  return normalized_rows(a, "A") * normalized_rows(b, "B").transpose();
}

}  // namespace adml
