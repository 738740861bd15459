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

#include "adml/encoders/encoders.hpp"

#include <string>

#include "adml/autodiff/ops.hpp"

namespace adml {

AcousticEncoder::AcousticEncoder(const EncoderConfig& cfg, Rng& rng)
    : feature_dim_(cfg.feature_dim), kernel_(cfg.conv_kernel) {
  if (cfg.conv_layers < 1) throw StructuralError("AcousticEncoder: need at least one conv layer");
  int in = cfg.feature_dim;
  for (int l = 0; l < cfg.conv_layers; ++l) {
    convs.emplace_back(static_cast<Eigen::Index>(in) * cfg.conv_kernel, cfg.conv_channels, rng);
    in = cfg.conv_channels;
  }
  projection = Linear(cfg.conv_channels, cfg.embed_dim, rng);
}

ad::Var AcousticEncoder::forward(ad::Graph& g, ad::Var features) const {
  if (features.cols() != feature_dim_) {
    throw StructuralError("acoustic_encode: feature dim " + std::to_string(features.cols()) + ", expected " +
                          std::to_string(feature_dim_));
  }
  if (features.rows() < 1) throw StructuralError("acoustic_encode: empty sequence");
  ad::Var h = ad::relu(convs[0].forward(g, ad::unfold_time(features, kernel_)));
  for (std::size_t l = 1; l < convs.size(); ++l) {
    h = ad::add(h, ad::relu(convs[l].forward(g, ad::unfold_time(h, kernel_))));
  }
  return projection.forward(g, h);
}

Matrix AcousticEncoder::encode(const Matrix& features) const {
  ad::Graph g;
  return forward(g, g.constant(features)).value();
}

void AcousticEncoder::visit(const std::string& prefix, const ParamVisitor& f) {
  for (std::size_t l = 0; l < convs.size(); ++l) convs[l].visit(prefix + "/conv" + std::to_string(l), f);
  projection.visit(prefix + "/projection", f);
}

TextEncoder::TextEncoder(const EncoderConfig& cfg, Rng& rng)
    : table(uniform_fan_in(cfg.vocab_size, cfg.embed_dim, 1, rng)),
      fwd_input(cfg.embed_dim, cfg.rnn_units, rng),
      fwd_recurrent(uniform_fan_in(cfg.rnn_units, cfg.rnn_units, cfg.rnn_units, rng)),
      bwd_input(cfg.embed_dim, cfg.rnn_units, rng),
      bwd_recurrent(uniform_fan_in(cfg.rnn_units, cfg.rnn_units, cfg.rnn_units, rng)),
      projection(2 * cfg.rnn_units, cfg.embed_dim, rng) {}

namespace {

std::vector<ad::Var> run_direction(ad::Graph& g, ad::Var inputs, const Matrix& recurrent, bool reverse) {
  const Eigen::Index t_len = inputs.rows();
  std::vector<ad::Var> states(static_cast<std::size_t>(t_len));
  ad::Var rec = g.param(recurrent);
  ad::Var prev{};
  for (Eigen::Index step = 0; step < t_len; ++step) {
    const Eigen::Index t = reverse ? t_len - 1 - step : step;
    ad::Var pre = ad::slice_rows(inputs, t, 1);
    if (step > 0) pre = ad::add(pre, ad::matmul(prev, rec));
    prev = ad::tanh(pre);
    states[static_cast<std::size_t>(t)] = prev;
  }
  return states;
}

}  // namespace

ad::Var TextEncoder::forward(ad::Graph& g, std::span<const int> ids) const {
  if (ids.empty()) throw StructuralError("text_encode: empty phoneme sequence");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw DomainError("text_encode: phoneme id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                        " is outside [0, " + std::to_string(table.rows()) + ")");
    }
  }
  ad::Var emb = ad::gather_rows(g.param(table), ids);
  ad::Var fwd = ad::concat_rows(run_direction(g, fwd_input.forward(g, emb), fwd_recurrent, false));
  ad::Var bwd = ad::concat_rows(run_direction(g, bwd_input.forward(g, emb), bwd_recurrent, true));
  return projection.forward(g, ad::concat_cols({fwd, bwd}));
}

Matrix TextEncoder::encode(std::span<const int> ids) const {
  ad::Graph g;
  return forward(g, ids).value();
}

void TextEncoder::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + "/lookup", table);
  fwd_input.visit(prefix + "/rnn_fwd/input", f);
  f(prefix + "/rnn_fwd/recurrent", fwd_recurrent);
  bwd_input.visit(prefix + "/rnn_bwd/input", f);
  f(prefix + "/rnn_bwd/recurrent", bwd_recurrent);
  projection.visit(prefix + "/projection", f);
}

WeightedStats weighted_statistics(ad::Var seq, ad::Var logits, double eps) {
  if (seq.rows() < 1) throw StructuralError("ccsp_pool: empty sequence");
  ad::Var w = ad::col_softmax(logits);
  ad::Var mean = ad::sum_over_rows(ad::mul(w, seq));
  ad::Var second = ad::sum_over_rows(ad::mul(w, ad::square(seq)));
  ad::Var stddev = ad::sqrt_floor(ad::sub(second, ad::square(mean)), eps);
  return {w, mean, stddev};
}

CcspPooling::CcspPooling(const EncoderConfig& cfg, Rng& rng)
    : attention_hidden(3 * cfg.embed_dim, cfg.ccsp_hidden, rng),
      attention_out(cfg.ccsp_hidden, cfg.embed_dim, rng),
      projection(2 * cfg.embed_dim, cfg.embed_dim, rng),
      eps_(cfg.ccsp_eps) {}

ad::Var CcspPooling::attention_logits(ad::Graph& g, ad::Var seq) const {
  const Eigen::Index t_len = seq.rows();
  ad::Var mean = ad::mean_over_rows(seq);
  ad::Var var = ad::sub(ad::mean_over_rows(ad::square(seq)), ad::square(mean));
  ad::Var stddev = ad::sqrt_floor(var, eps_);
  ad::Var context = ad::concat_cols({seq, ad::repeat_rows(mean, t_len), ad::repeat_rows(stddev, t_len)});
  return attention_out.forward(g, ad::tanh(attention_hidden.forward(g, context)));
}

ad::Var CcspPooling::forward(ad::Graph& g, ad::Var seq) const {
  if (seq.rows() < 1) throw StructuralError("ccsp_pool: empty sequence");
  WeightedStats st = weighted_statistics(seq, attention_logits(g, seq), eps_);
  return projection.forward(g, ad::concat_cols({st.mean, st.stddev}));
}

RowVector CcspPooling::pool(const Matrix& seq) const {
  ad::Graph g;
  return forward(g, g.constant(seq)).value().row(0);
}

void CcspPooling::visit(const std::string& prefix, const ParamVisitor& f) {
  attention_hidden.visit(prefix + "/attention_hidden", f);
  attention_out.visit(prefix + "/attention_out", f);
  projection.visit(prefix + "/projection", f);
}

ad::Var gap_pool(ad::Var seq) {
  if (seq.rows() < 1) throw StructuralError("gap_pool: empty sequence");
  return ad::mean_over_rows(seq);
}

RowVector gap_pool(const Matrix& seq) {
  if (seq.rows() < 1) throw StructuralError("gap_pool: empty sequence");
  return seq.colwise().mean();
}

}  // namespace adml
