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

#include "adml/train/model.hpp"

namespace adml {

Model Model::create(const EncoderConfig& enc, const LossConfig& losses, const AdvConfig& adv, int num_classes,
                    std::uint64_t seed) {
  Rng rng = substream(seed, "init");
  Model m;
  m.encoder = enc;
  m.phoneme_kind = losses.phoneme;
  m.head_kind = losses.classifier;
  m.acoustic = AcousticEncoder(enc, rng);
  m.ccsp = CcspPooling(enc, rng);
  m.text = TextEncoder(enc, rng);
  m.asyp = losses.phoneme == PhonemeLossKind::kAsyPAdaMS
               ? AsyPParams::adaptive(enc.vocab_size, losses.alpha, losses.beta, losses.lambda)
               : AsyPParams::fixed(losses.alpha, losses.beta, losses.lambda);
  m.head = ClassifierHead::create(std::max(num_classes, 1), enc.embed_dim, rng);
  m.head.scale = losses.cls_scale;
  m.head.margin = losses.cls_margin;
  m.head.t_balance = losses.sf2_t;
  m.modality = ModalityClassifier::create(enc.embed_dim, adv.hidden, rng);
  m.modality.activation = adv.activation;
  m.modality.normalize_input = adv.normalize_input;
  return m;
}

void Model::visit(const GroupedParamVisitor& f) {
  auto emb = [&](const std::string& n, Matrix& v) { f(n, v, ParamGroup::kEmbedding); };
  acoustic.visit("acoustic", emb);
  ccsp.visit("ccsp", emb);
  text.visit("text", emb);
  asyp.visit("asyp", emb);
  if (head_kind == ClassifierKind::kAam || head_kind == ClassifierKind::kSphereFace2) {
    head.visit("head", emb, head_kind == ClassifierKind::kSphereFace2);
  }
  modality.visit("modality", [&](const std::string& n, Matrix& v) { f(n, v, ParamGroup::kModality); });
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  visit([&](const std::string&, Matrix& v, ParamGroup) { n += static_cast<std::size_t>(v.size()); });
  return n;
}

RowVector Model::embed_audio(const Matrix& features) const {
  ad::Graph g;
  return ccsp.forward(g, acoustic.forward(g, g.constant(features))).value().row(0);
}

RowVector Model::embed_text(std::span<const int> phonemes) const {
  ad::Graph g;
  return gap_pool(text.forward(g, phonemes)).value().row(0);
}

}  // namespace adml
