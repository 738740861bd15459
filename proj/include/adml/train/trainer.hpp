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

#ifndef ADML_TRAIN_TRAINER_HPP_
#define ADML_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "adml/core/batch.hpp"
#include "adml/data/synth.hpp"
#include "adml/train/model.hpp"

namespace adml {

struct TrainConfig {
  int keywords_per_batch = 16;      // P
  int utterances_per_keyword = 2;   // K
  int epochs = 30;
  double base_lr = 1e-4;
  int lr_halving_period = 20;
  double weight_decay = 1e-5;
  double grad_clip = 5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 0;  // epochs; 0 = final only
  std::uint64_t seed = 1;
  LossConfig losses;
  AdvConfig adv;

  void validate() const;
};

double lr_at(int epoch, const TrainConfig& cfg);

struct EmbeddingTerms {
  double utt = 0.0;
  double key = 0.0;
  double mm = 0.0;
  double phn = 0.0;
};

double embedding_loss(const EmbeddingTerms& terms, double lambda_phn);

struct StepMetrics {
  double l_utt = 0.0;
  double l_key = 0.0;
  double l_mm = 0.0;
  double l_phn = 0.0;
  double l_adv_phn = 0.0;
  double l_adv_utt = 0.0;
  double total = 0.0;      // embedding side
  double objective = 0.0;  // total + lambda_adv * (l_adv_phn + l_adv_utt), as differentiated
  double grad_norm_emb = 0.0;
  double grad_norm_mod = 0.0;
  double modality_accuracy = 0.0;
};

struct AdamMoments {
  Matrix m;
  Matrix v;
};

struct TrainState {
  Model model;
  std::map<std::string, AdamMoments> moments;
  long step = 0;
  int epoch = 0;
};

TrainState init_train_state(const EncoderConfig& enc, const TrainConfig& cfg, int num_classes);

// Utterance indices of one batch, keyword-major.
using BatchPlan = std::vector<int>;

// Every keyword of `split` with >= K utterances appears in at most one batch per epoch.
std::vector<BatchPlan> plan_epoch(const Corpus& corpus, Split split, int P, int K, Rng& rng);
PhonemeBatch make_batch(const Corpus& corpus, const BatchPlan& plan);
PhonemeBatch sample_batch(const Corpus& corpus, int P, int K, Rng& rng);

struct LossTerms {
  bool embedding = true;
  bool adversarial = true;
};

struct ParamGradient {
  ParamGroup group = ParamGroup::kEmbedding;
  Matrix grad;
};

struct GradientResult {
  StepMetrics metrics;
  std::map<std::string, ParamGradient> grads;  // only parameters the objective reaches
};

// Forward + backward on one batch without touching the model.
GradientResult compute_gradients(Model& model, const PhonemeBatch& batch, const TrainConfig& cfg,
                                 LossTerms terms = {});

StepMetrics train_step_inplace(TrainState& state, const PhonemeBatch& batch, const TrainConfig& cfg);
std::pair<TrainState, StepMetrics> train_step(TrainState state, const PhonemeBatch& batch, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  long step = 0;
  int batches = 0;
  StepMetrics mean;
  double lr = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&, TrainState&)>;

// Trains on the train split from the "batching" substream of cfg.seed.
void fit(TrainState& state, const Corpus& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Throws StructuralError unless every parameter has exactly one group and a unique name.
void check_parameter_partition(Model& model);

}  // namespace adml

#endif  // ADML_TRAIN_TRAINER_HPP_
