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

#include "adml/losses/classification.hpp"

#include <map>
#include <string>

#include "adml/autodiff/ops.hpp"
#include "adml/losses/dml.hpp"

namespace adml {

ClassifierKind parse_classifier(std::string_view key) {
  static const std::map<std::string, ClassifierKind, std::less<>> kRegistry = {
      {"none", ClassifierKind::kNone},
      {"triplet", ClassifierKind::kTriplet},
      {"aam", ClassifierKind::kAam},
      {"sphereface2", ClassifierKind::kSphereFace2}};
  auto it = kRegistry.find(key);
  if (it == kRegistry.end()) throw StructuralError("unknown classifier '" + std::string(key) + "'");
  return it->second;
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kNone: return "none";
    case ClassifierKind::kTriplet: return "triplet";
    case ClassifierKind::kAam: return "aam";
    case ClassifierKind::kSphereFace2: return "sphereface2";
  }
  return "unknown";
}

ClassifierHead ClassifierHead::create(int num_classes, int dim, Rng& rng) {
  ClassifierHead h;
  h.weight = uniform_fan_in(num_classes, dim, dim, rng);
  h.bias = Matrix::Zero(1, num_classes);
  return h;
}

void ClassifierHead::visit(const std::string& prefix, const ParamVisitor& f, bool with_bias) {
  f(prefix + "/weight", weight);
  if (with_bias) f(prefix + "/bias", bias);
}

namespace {

void check_labels(const ClassifierHead& head, ad::Var emb, std::span<const int> labels, const char* op) {
  if (static_cast<Eigen::Index>(labels.size()) != emb.rows()) {
    throw StructuralError(std::string(op) + ": one label per embedding required");
  }
  if (labels.empty()) throw StructuralError(std::string(op) + ": empty batch");
  if (!(head.scale > 0) || head.margin < 0) throw DomainError(std::string(op) + ": need s > 0 and m >= 0");
  for (int l : labels) {
    if (l < 0 || l >= head.num_classes()) {
      throw DomainError(std::string(op) + ": label " + std::to_string(l) + " outside [0, " +
                        std::to_string(head.num_classes()) + ")");
    }
  }
}

Matrix one_hot(std::span<const int> labels, int classes) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return m;
}

}  // namespace

ad::Var aam_softmax_loss(const ClassifierHead& head, ad::Var emb, std::span<const int> labels) {
  check_labels(head, emb, labels, "aam_softmax_loss");
  ad::Graph& g = *emb.graph;
  ad::Var cosines = ad::pairwise_cosine(emb, g.param(head.weight));
  ad::Var logits = ad::scale(ad::angular_margin(cosines, one_hot(labels, head.num_classes()), head.margin), head.scale);
  return ad::neg(ad::mean_all(ad::pick(ad::log_softmax_rows(logits), labels)));
}

double aam_softmax_loss(const ClassifierHead& head, const Matrix& emb, std::span<const int> labels) {
  ad::Graph g;
  return aam_softmax_loss(head, g.constant(emb), labels).scalar();
}

ad::Var sphereface2_loss(const ClassifierHead& head, ad::Var emb, std::span<const int> labels) {
  check_labels(head, emb, labels, "sphereface2_loss");
  ad::Graph& g = *emb.graph;
  const int classes = head.num_classes();
  const double s = head.scale;
  const double r = head.radius_weight;
  const Matrix target = one_hot(labels, classes);
  const Matrix others = Matrix::Ones(target.rows(), target.cols()) - target;

  ad::Var cosines = ad::clamp(ad::pairwise_cosine(emb, g.param(head.weight)), -1.0, 1.0);
  ad::Var rescaled = ad::add_scalar(ad::scale(ad::pow(ad::scale(ad::add_scalar(cosines, 1.0), 0.5), head.t_balance), 2.0), -1.0);
  ad::Var base = ad::add_row(ad::scale(rescaled, s), g.param(head.bias));

  ad::Var pos = ad::mul(ad::softplus(ad::neg(ad::add_scalar(base, -s * head.margin))), g.constant(target));
  ad::Var total = ad::scale(ad::sum_all(pos), 1.0 / r);
  if (classes > 1) {
    ad::Var negs = ad::mul(ad::softplus(ad::add_scalar(base, s * head.margin)), g.constant(others));
    total = ad::add(total, ad::scale(ad::sum_all(negs), head.t_balance / (r * (classes - 1))));
  }
  return ad::scale(total, 1.0 / static_cast<double>(labels.size()));
}

double sphereface2_loss(const ClassifierHead& head, const Matrix& emb, std::span<const int> labels) {
  ad::Graph g;
  return sphereface2_loss(head, g.constant(emb), labels).scalar();
}

ad::Var keyword_triplet_loss(ad::Var emb, std::span<const int> labels, double margin) {
  return triplet_hinge(ad::pairwise_cosine(emb, emb), labels, margin, true);
}

ad::Var keyword_loss(ClassifierKind kind, const ClassifierHead& head, ad::Var emb, std::span<const int> labels,
                     double triplet_margin) {
  switch (kind) {
    case ClassifierKind::kNone: return emb.graph->scalar_constant(0.0);
    case ClassifierKind::kTriplet: return keyword_triplet_loss(emb, labels, triplet_margin);
    case ClassifierKind::kAam: return aam_softmax_loss(head, emb, labels);
    case ClassifierKind::kSphereFace2: return sphereface2_loss(head, emb, labels);
  }
  throw StructuralError("keyword_loss: unknown kind");
}

}  // namespace adml
