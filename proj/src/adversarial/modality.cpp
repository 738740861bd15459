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

#include "adml/adversarial/modality.hpp"

#include <vector>

#include "adml/autodiff/ops.hpp"

namespace adml {

ModalityClassifier ModalityClassifier::create(int dim, int hidden_units, Rng& rng) {
  return {Linear(dim, hidden_units, rng), Linear(hidden_units, 2, rng)};
}

ModalityClassifier ModalityClassifier::zeros(int dim, int hidden_units) {
  ModalityClassifier c;
  c.hidden.weight = Matrix::Zero(dim, hidden_units);
  c.hidden.bias = Matrix::Zero(1, hidden_units);
  c.output.weight = Matrix::Zero(hidden_units, 2);
  c.output.bias = Matrix::Zero(1, 2);
  return c;
}

ad::Var ModalityClassifier::logits(ad::Graph& g, ad::Var x) const {
  ad::Var in = normalize_input ? ad::row_normalize(x) : x;
  ad::Var h = hidden.forward(g, in);
  return output.forward(g, activation == HiddenActivation::kRelu ? ad::relu(h) : ad::tanh(h));
}

RowVector ModalityClassifier::classify(const RowVector& emb) const {
  ad::Graph g;
  Matrix x = emb;
  return ad::row_softmax(logits(g, g.constant(x))).value().row(0);
}

void ModalityClassifier::visit(const std::string& prefix, const ParamVisitor& f) {
  hidden.visit(prefix + "/hidden", f);
  output.visit(prefix + "/output", f);
}

ad::Var modality_nll(const ModalityClassifier& clf, ad::Var audio_rows, ad::Var text_rows) {
  if (audio_rows.rows() != text_rows.rows()) throw StructuralError("adversarial loss: modalities differ in row count");
  const Eigen::Index n = audio_rows.rows();
  if (n == 0) throw StructuralError("adversarial loss: no rows");
  ad::Graph& g = *audio_rows.graph;
  std::vector<int> truth(static_cast<std::size_t>(2 * n), kAudioModality);
  std::fill(truth.begin() + n, truth.end(), kTextModality);
  ad::Var logp = ad::log_softmax_rows(clf.logits(g, ad::concat_rows({audio_rows, text_rows})));
  return ad::scale(ad::sum_all(ad::pick(logp, truth)), -1.0 / static_cast<double>(n));
}

ad::Var adv_loss_phn(const ModalityClassifier& clf, ad::Var flat_audio, ad::Var flat_text) {
  return modality_nll(clf, flat_audio, flat_text);
}

ad::Var adv_loss_utt(const ModalityClassifier& clf, ad::Var utt_audio, ad::Var utt_text) {
  return modality_nll(clf, utt_audio, utt_text);
}

double adv_loss_phn(const ModalityClassifier& clf, const Matrix& flat_audio, const Matrix& flat_text) {
  ad::Graph g;
  return adv_loss_phn(clf, g.constant(flat_audio), g.constant(flat_text)).scalar();
}

double adv_loss_utt(const ModalityClassifier& clf, const Matrix& utt_audio, const Matrix& utt_text) {
  ad::Graph g;
  return adv_loss_utt(clf, g.constant(utt_audio), g.constant(utt_text)).scalar();
}

AdvLoss total_adv_loss(const ModalityClassifier& clf, ad::Var flat_audio, ad::Var flat_text, ad::Var utt_audio,
                       ad::Var utt_text, AdvLevels levels) {
  ad::Graph& g = *flat_audio.graph;
  AdvLoss out{g.scalar_constant(0.0), g.scalar_constant(0.0), {}, !levels.phn && !levels.utt};
  if (levels.phn) out.phn = adv_loss_phn(clf, flat_audio, flat_text);
  if (levels.utt) out.utt = adv_loss_utt(clf, utt_audio, utt_text);
  out.total = ad::add(out.phn, out.utt);
  return out;
}

AdvLossValue total_adv_loss(const ModalityClassifier& clf, const Matrix& flat_audio, const Matrix& flat_text,
                            const Matrix& utt_audio, const Matrix& utt_text, AdvLevels levels) {
  ad::Graph g;
  AdvLoss l = total_adv_loss(clf, g.constant(flat_audio), g.constant(flat_text), g.constant(utt_audio),
                             g.constant(utt_text), levels);
  return {l.phn.scalar(), l.utt.scalar(), l.total.scalar(), l.all_disabled};
}

double modality_accuracy(const ModalityClassifier& clf, const Matrix& audio_rows, const Matrix& text_rows) {
  ad::Graph g;
  const Matrix la = clf.logits(g, g.constant(audio_rows)).value();
  const Matrix lt = clf.logits(g, g.constant(text_rows)).value();
  double correct = 0.0;
  for (Eigen::Index i = 0; i < la.rows(); ++i) correct += la(i, kAudioModality) > la(i, kTextModality) ? 1.0 : 0.0;
  for (Eigen::Index i = 0; i < lt.rows(); ++i) correct += lt(i, kTextModality) > lt(i, kAudioModality) ? 1.0 : 0.0;
  const double total = static_cast<double>(la.rows() + lt.rows());
  return total > 0 ? correct / total : 0.0;
}

}  // namespace adml
