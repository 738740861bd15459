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

#include "adml/alignment/cross_attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adml/autodiff/ops.hpp"

namespace adml {

AttentionVars cross_attend(ad::Var text, ad::Var audio) {
  if (text.rows() < 1 || audio.rows() < 1) throw StructuralError("cross_attend: empty sequence");
  if (text.cols() != audio.cols()) throw StructuralError("cross_attend: embedding dimension mismatch");
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(text.cols()));
  ad::Var affinity = ad::row_softmax(ad::scale(ad::matmul_nt(text, audio), inv_sqrt_dk));
  return {affinity, ad::matmul(affinity, audio)};
}

AffinityResult cross_attend(const Matrix& text, const Matrix& audio) {
  ad::Graph g;
  AttentionVars v = cross_attend(g.constant(text), g.constant(audio));
  return {v.affinity.value(), v.aggregated.value()};
}

Matrix monotonic_target(Eigen::Index text_len, Eigen::Index audio_len, double width_ratio) {
  if (text_len < 1 || audio_len < 1) throw StructuralError("monotonic_target: empty dimension");
  if (width_ratio < 0) throw DomainError("monotonic_target: negative width");
  Matrix target = Matrix::Zero(text_len, audio_len);
  const double step = static_cast<double>(audio_len - 1) / static_cast<double>(std::max<Eigen::Index>(text_len - 1, 1));
  const double width = width_ratio * static_cast<double>(audio_len);
  for (Eigen::Index i = 0; i < text_len; ++i) {
    const double center = static_cast<double>(i) * step;
    if (width <= 0.0) {
      target(i, static_cast<Eigen::Index>(std::lround(center))) = 1.0;
      continue;
    }
    for (Eigen::Index j = 0; j < audio_len; ++j) {
      const double z = (static_cast<double>(j) - center) / width;
      target(i, j) = std::exp(-0.5 * z * z);
    }
    target.row(i) /= target.row(i).sum();
  }
  return target;
}

namespace {

void check_row_stochastic(const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double s = a.row(i).sum();
    if (std::abs(s - 1.0) > 1e-4) {
      throw ContractViolation("monotonic_matching_loss: affinity row " + std::to_string(i) + " sums to " +
                              std::to_string(s));
    }
  }
}

}  // namespace

ad::Var monotonic_matching_loss(ad::Var affinity, bool is_match, double width_ratio) {
  ad::Graph& g = *affinity.graph;
  if (!is_match) return g.scalar_constant(0.0);
  check_row_stochastic(affinity.value());
  ad::Var target = g.constant(monotonic_target(affinity.rows(), affinity.cols(), width_ratio));
  return ad::mean_all(ad::square(ad::sub(affinity, target)));
}

double monotonic_matching_loss(const Matrix& affinity, bool is_match, double width_ratio) {
  ad::Graph g;
  return monotonic_matching_loss(g.constant(affinity), is_match, width_ratio).scalar();
}

}  // namespace adml
