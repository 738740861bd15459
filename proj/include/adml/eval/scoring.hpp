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

#ifndef ADML_EVAL_SCORING_HPP_
#define ADML_EVAL_SCORING_HPP_

#include <cstdint>

#include "adml/data/synth.hpp"
#include "adml/train/model.hpp"

namespace adml {

struct MetricReport {
  double ap = 0.0;
  double eer = 0.0;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

MetricReport compute_metrics(const TrialSet& trials);

// Audio embeddings are computed once per utterance, text embeddings once per keyword.
TrialSet score_trials(const Model& model, const Corpus& corpus, TrialSet trials);

TrialSet eval_trials(const Corpus& corpus, int neg_ratio, std::uint64_t seed);

struct EmbeddingPairs {
  Matrix audio;  // rows labelled audio
  Matrix text;   // rows labelled text
};

// Frozen eval-split embeddings at the utterance and the phoneme level, stacked.
EmbeddingPairs frozen_embeddings(const Model& model, const Corpus& corpus, Split split);

struct ProbeConfig {
  int hidden = 64;
  int steps = 300;
  double lr = 1e-2;
  double train_fraction = 0.5;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

ProbeResult train_modality_probe(const EmbeddingPairs& data, const ProbeConfig& cfg, std::uint64_t seed);

}  // namespace adml

#endif  // ADML_EVAL_SCORING_HPP_
