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

#ifndef ADML_LOSSES_CLASSIFICATION_HPP_
#define ADML_LOSSES_CLASSIFICATION_HPP_

#include <span>
#include <string>
#include <string_view>

#include "adml/autodiff/graph.hpp"
#include "adml/core/params.hpp"

namespace adml {

enum class ClassifierKind { kNone, kTriplet, kAam, kSphereFace2 };

// Registry keys: "none", "triplet", "aam", "sphereface2".
ClassifierKind parse_classifier(std::string_view key);
std::string_view to_string(ClassifierKind kind);

// Keyword classifier over acoustic utterance embeddings. Weight rows are L2-normalised
// before every logit computation.
struct ClassifierHead {
  Matrix weight;  // C x d
  Matrix bias;    // 1 x C, SphereFace2 only
  double scale = 30.0;
  double margin = 0.2;
  double t_balance = 3.0;
  double radius_weight = 1.0;  // r

  static ClassifierHead create(int num_classes, int dim, Rng& rng);
  int num_classes() const { return static_cast<int>(weight.rows()); }
  void visit(const std::string& prefix, const ParamVisitor& f, bool with_bias);
};

// Cross-entropy over s * cos(theta_c + m [c == label]).
ad::Var aam_softmax_loss(const ClassifierHead& head, ad::Var emb, std::span<const int> labels);
double aam_softmax_loss(const ClassifierHead& head, const Matrix& emb, std::span<const int> labels);

// One binary logistic classifier per class on rescaled cosines g(z) = 2((z+1)/2)^t - 1:
// target term softplus(-(s (g - m) + b_c)) / r, each non-target term
// softplus(s (g + m) + b_c) t / (r (C - 1)); averaged over samples.
ad::Var sphereface2_loss(const ClassifierHead& head, ad::Var emb, std::span<const int> labels);
double sphereface2_loss(const ClassifierHead& head, const Matrix& emb, std::span<const int> labels);

// Cosine triplet hinge among acoustic embeddings of the batch.
ad::Var keyword_triplet_loss(ad::Var emb, std::span<const int> labels, double margin);

ad::Var keyword_loss(ClassifierKind kind, const ClassifierHead& head, ad::Var emb, std::span<const int> labels,
                     double triplet_margin = 0.2);

}  // namespace adml

#endif  // ADML_LOSSES_CLASSIFICATION_HPP_
