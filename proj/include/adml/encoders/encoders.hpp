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

#ifndef ADML_ENCODERS_ENCODERS_HPP_
#define ADML_ENCODERS_ENCODERS_HPP_

#include <span>
#include <string>
#include <vector>

#include "adml/autodiff/graph.hpp"
#include "adml/core/params.hpp"

namespace adml {

struct EncoderConfig {
  int feature_dim = 40;
  int embed_dim = 256;
  int conv_layers = 3;
  int conv_channels = 64;
  int conv_kernel = 3;
  int vocab_size = 40;
  int rnn_units = 64;
  int ccsp_hidden = 128;
  double ccsp_eps = 1e-10;
};

// 1-D convolution stack with same-length padding (no subsampling), residual from the
// second layer on, then a per-frame projection to embed_dim. T_a x F -> T_a x d.
class AcousticEncoder {
 public:
  AcousticEncoder() = default;
  AcousticEncoder(const EncoderConfig& cfg, Rng& rng);

  ad::Var forward(ad::Graph& g, ad::Var features) const;
  Matrix encode(const Matrix& features) const;

  void visit(const std::string& prefix, const ParamVisitor& f);

  std::vector<Linear> convs;  // kernel taps flattened: (k * C_in) x C_out
  Linear projection;

 private:
  int feature_dim_ = 0;
  int kernel_ = 3;
};

// Lookup table, one bidirectional tanh recurrent layer, per-position projection.
// T_t ids -> T_t x d.
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(const EncoderConfig& cfg, Rng& rng);

  ad::Var forward(ad::Graph& g, std::span<const int> ids) const;
  Matrix encode(std::span<const int> ids) const;

  void visit(const std::string& prefix, const ParamVisitor& f);

  Matrix table;  // V x d
  Linear fwd_input;
  Matrix fwd_recurrent;
  Linear bwd_input;
  Matrix bwd_recurrent;
  Linear projection;  // 2H -> d
};

struct WeightedStats {
  ad::Var weights;  // T x d, columns sum to 1
  ad::Var mean;     // 1 x d
  ad::Var stddev;   // 1 x d
};

// Per-channel softmax over time of `logits`, then attention-weighted mean and
// sqrt(max(E_w[x^2] - mean^2, eps)).
WeightedStats weighted_statistics(ad::Var seq, ad::Var logits, double eps);

// Channel- and context-dependent statistics pooling: attention logits come from each frame
// concatenated with the sequence mean and standard deviation. T x d -> 1 x d.
class CcspPooling {
 public:
  CcspPooling() = default;
  CcspPooling(const EncoderConfig& cfg, Rng& rng);

  ad::Var forward(ad::Graph& g, ad::Var seq) const;
  ad::Var attention_logits(ad::Graph& g, ad::Var seq) const;
  RowVector pool(const Matrix& seq) const;

  void visit(const std::string& prefix, const ParamVisitor& f);

  Linear attention_hidden;  // 3d -> hidden
  Linear attention_out;     // hidden -> d
  Linear projection;        // 2d -> d

 private:
  double eps_ = 1e-10;
};

// Mean over time. T x d -> 1 x d.
ad::Var gap_pool(ad::Var seq);
RowVector gap_pool(const Matrix& seq);

}  // namespace adml

#endif  // ADML_ENCODERS_ENCODERS_HPP_
