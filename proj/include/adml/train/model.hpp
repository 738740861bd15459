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

#ifndef ADML_TRAIN_MODEL_HPP_
#define ADML_TRAIN_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "adml/adversarial/modality.hpp"
#include "adml/encoders/encoders.hpp"
#include "adml/losses/classification.hpp"
#include "adml/losses/dml.hpp"

namespace adml {

struct LossConfig {
  PhonemeLossKind phoneme = PhonemeLossKind::kAsyPAdaMS;
  bool utterance_rp = true;
  ClassifierKind classifier = ClassifierKind::kSphereFace2;
  bool monotonic_matching = true;
  double mm_width = 0.1;
  double lambda_phn = 0.1;
  double alpha = 0.01;
  double beta = 1.5;
  double lambda = 0.01;
  RpLossWeights rp_weights;
  RpOptions rp;
  PhonemeLossOptions phn;
  double cls_scale = 30.0;
  double cls_margin = 0.2;
  double sf2_t = 3.0;
  double key_triplet_margin = 0.2;
};

struct AdvConfig {
  bool enabled_phn = true;
  bool enabled_utt = true;
  double lambda = 0.1;
  int hidden = 256;
  HiddenActivation activation = HiddenActivation::kRelu;
  bool normalize_input = true;
};

using GroupedParamVisitor = std::function<void(const std::string& name, Matrix& value, ParamGroup group)>;

// Everything trainable. theta_emb = encoders, pooling, AsyP hyperparameters and keyword head;
// theta_M = modality classifier.
struct Model {
  EncoderConfig encoder;
  PhonemeLossKind phoneme_kind = PhonemeLossKind::kNone;
  ClassifierKind head_kind = ClassifierKind::kNone;

  AcousticEncoder acoustic;
  CcspPooling ccsp;
  TextEncoder text;
  AsyPParams asyp;
  ClassifierHead head;
  ModalityClassifier modality;

  // Initialises every component from the "init" substream of `seed`.
  static Model create(const EncoderConfig& enc, const LossConfig& losses, const AdvConfig& adv, int num_classes,
                      std::uint64_t seed);

  void visit(const GroupedParamVisitor& f);
  std::size_t parameter_count();

  RowVector embed_audio(const Matrix& features) const;
  RowVector embed_text(std::span<const int> phonemes) const;
};

}  // namespace adml

#endif  // ADML_TRAIN_MODEL_HPP_
