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

#ifndef ADML_LOSSES_DML_HPP_
#define ADML_LOSSES_DML_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adml/autodiff/graph.hpp"
#include "adml/core/batch.hpp"
#include "adml/core/params.hpp"

namespace adml {

// (1/alpha) ln(1 + sum_j exp(alpha (lam - s_j))). 0 for an empty list.
double else_term(std::span<const double> sims, double alpha, double lam);
// (1/|s|) sum_k ln(1 + exp(beta (s_k - lam))). 0 for an empty list.
double msp_term(std::span<const double> sims, double beta, double lam);
// Differentiable forms over a 1 x n row of similarities.
ad::Var else_term(ad::Var sims, double alpha, double lam);
ad::Var msp_term(ad::Var sims, double beta, double lam);

double softplus_inverse(double y);

// Scale/boundary hyperparameters of the asymmetric proxy loss. In adaptive mode there is
// one (alpha, beta, lambda) per phoneme class; alpha and beta are stored as softplus
// pre-activations so they stay positive, lambda is clamped to [-1, 1] after each update.
struct AsyPParams {
  bool learnable = false;
  Matrix alpha_raw;  // V x 1 (adaptive) or 1 x 1 (fixed)
  Matrix beta_raw;
  Matrix lambda;

  static AsyPParams fixed(double alpha = 0.01, double beta = 1.5, double lambda = 0.01);
  static AsyPParams adaptive(int vocab_size, double alpha = 0.01, double beta = 1.5, double lambda = 0.01);

  double alpha(int phoneme) const;
  double beta(int phoneme) const;
  double lambda_of(int phoneme) const;
  void clamp_lambda();
  // Visits nothing in fixed mode.
  void visit(const std::string& prefix, const ParamVisitor& f);
};

enum class PhonemeLossKind { kNone, kAsyP, kAsyPAdaMS, kProxyMS, kProxyBD, kClat, kTriplet };

// Registry keys: "none", "asyp", "asyp_adams", "proxy_ms", "proxy_bd", "clat", "triplet".
PhonemeLossKind parse_phoneme_loss(std::string_view key);
std::string_view to_string(PhonemeLossKind kind);

struct PhonemeLossOptions {
  double infonce_tau = 0.07;
  double triplet_margin = 0.2;
};

// Text rows are anchors of the positive (ELSE) term, audio rows anchors of the negative
// (MSP) term; per-class hyperparameters are selected by the anchor's phoneme label.
ad::Var asyp_phoneme_loss(ad::Var flat_audio, ad::Var flat_text, std::span<const int> labels,
                          const AsyPParams& params);
double asyp_phoneme_loss(const FlatEmbeddings& flat_audio, const FlatEmbeddings& flat_text, const AsyPParams& params);

// Dispatches any registry kind except kNone; kAsyP/kAsyPAdaMS route to asyp_phoneme_loss.
ad::Var phoneme_loss(PhonemeLossKind kind, ad::Var flat_audio, ad::Var flat_text, std::span<const int> labels,
                     const AsyPParams& params, const PhonemeLossOptions& opts = {});
double baseline_phoneme_loss(PhonemeLossKind kind, const FlatEmbeddings& flat_audio, const FlatEmbeddings& flat_text,
                             const AsyPParams& params, const PhonemeLossOptions& opts = {});

// mean over valid (anchor i, positive j, negative k) of max(0, margin + s_ik - s_ij), where
// s is `sims` and positives / negatives follow `labels`. With exclude_self, j != i.
ad::Var triplet_hinge(ad::Var sims, std::span<const int> labels, double margin, bool exclude_self);

struct RpOptions {
  double huber_delta = 1.0;
  double proto_tau = 0.1;
};

struct RpLossWeights {
  double dist = 1.0;
  double angle = 1.0;
  double proto = 1.0;
};

// Relational losses distilling text-embedding structure into acoustic embeddings. The text
// side is always gradient-blocked.
ad::Var rp_distance_loss(ad::Var ae, ad::Var te, const RpOptions& opts = {});
ad::Var rp_angle_loss(ad::Var ae, ad::Var te, const RpOptions& opts = {});
ad::Var rp_proto_loss(ad::Var ae, ad::Var te, std::span<const int> keyword_ids, const RpOptions& opts = {});
ad::Var utterance_rp_loss(ad::Var ae, ad::Var te, std::span<const int> keyword_ids, const RpLossWeights& weights,
                          const RpOptions& opts = {});

double rp_distance_loss(const Matrix& ae, const Matrix& te, const RpOptions& opts = {});
double rp_angle_loss(const Matrix& ae, const Matrix& te, const RpOptions& opts = {});
double rp_proto_loss(const Matrix& ae, const Matrix& te, std::span<const int> keyword_ids, const RpOptions& opts = {});
double utterance_rp_loss(const Matrix& ae, const Matrix& te, std::span<const int> keyword_ids,
                         const RpLossWeights& weights, const RpOptions& opts = {});

}  // namespace adml

#endif  // ADML_LOSSES_DML_HPP_
