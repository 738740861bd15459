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

#ifndef ADML_ADVERSARIAL_MODALITY_HPP_
#define ADML_ADVERSARIAL_MODALITY_HPP_

#include <string>

#include "adml/autodiff/graph.hpp"
#include "adml/core/params.hpp"

namespace adml {

// Modality label convention.
inline constexpr int kAudioModality = 0;
inline constexpr int kTextModality = 1;

// Two fully connected layers: d -> hidden (ReLU) -> 2 modality logits.
enum class HiddenActivation { kRelu, kTanh };

struct ModalityClassifier {
  Linear hidden;
  Linear output;
  HiddenActivation activation = HiddenActivation::kRelu;
  bool normalize_input = true;  // rows are L2-normalized before the first layer

  static ModalityClassifier create(int dim, int hidden_units, Rng& rng);
  static ModalityClassifier zeros(int dim, int hidden_units);

  ad::Var logits(ad::Graph& g, ad::Var x) const;
  // Softmax probabilities (audio, text) for one embedding.
  RowVector classify(const RowVector& emb) const;
  void visit(const std::string& prefix, const ParamVisitor& f);
};

// -(1/N) sum over both modalities and all N rows of log p(true modality). The normalisation
// is by N (rows per modality), not 2N: a uniform classifier scores 2 ln 2.
ad::Var modality_nll(const ModalityClassifier& clf, ad::Var audio_rows, ad::Var text_rows);

// Phoneme level (flattened rows) and utterance level (one row per utterance).
ad::Var adv_loss_phn(const ModalityClassifier& clf, ad::Var flat_audio, ad::Var flat_text);
ad::Var adv_loss_utt(const ModalityClassifier& clf, ad::Var utt_audio, ad::Var utt_text);
double adv_loss_phn(const ModalityClassifier& clf, const Matrix& flat_audio, const Matrix& flat_text);
double adv_loss_utt(const ModalityClassifier& clf, const Matrix& utt_audio, const Matrix& utt_text);

struct AdvLevels {
  bool phn = true;
  bool utt = true;
};

struct AdvLoss {
  ad::Var phn;
  ad::Var utt;
  ad::Var total;
  bool all_disabled = false;  // both levels off: total is 0
};

AdvLoss total_adv_loss(const ModalityClassifier& clf, ad::Var flat_audio, ad::Var flat_text, ad::Var utt_audio,
                       ad::Var utt_text, AdvLevels levels);

struct AdvLossValue {
  double phn = 0.0;
  double utt = 0.0;
  double total = 0.0;
  bool all_disabled = false;
};

AdvLossValue total_adv_loss(const ModalityClassifier& clf, const Matrix& flat_audio, const Matrix& flat_text,
                            const Matrix& utt_audio, const Matrix& utt_text, AdvLevels levels);

// Fraction of rows whose arg-max modality is correct.
double modality_accuracy(const ModalityClassifier& clf, const Matrix& audio_rows, const Matrix& text_rows);

}  // namespace adml

#endif  // ADML_ADVERSARIAL_MODALITY_HPP_
