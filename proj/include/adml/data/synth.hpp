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

#ifndef ADML_DATA_SYNTH_HPP_
#define ADML_DATA_SYNTH_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "adml/core/rng.hpp"
#include "adml/core/types.hpp"

namespace adml {

// Keyword id -> phoneme sequence. Stands in for a grapheme-to-phoneme front end.
struct Lexicon {
  int vocab_size = 0;
  std::vector<std::vector<int>> sequences;

  int size() const { return static_cast<int>(sequences.size()); }
  const std::vector<int>& phonemes(int keyword) const { return sequences.at(static_cast<std::size_t>(keyword)); }
};

// num_keywords pairwise-distinct sequences with lengths uniform in [min_len, max_len].
Lexicon build_lexicon(int num_keywords, int vocab_size, int min_len, int max_len, Rng& rng);

struct SynthesisProfile {
  Matrix prototypes;  // V x F, one mean frame per phoneme
  int dur_min = 2;
  int dur_max = 5;
  double jitter = 0.3;   // per phoneme occurrence
  double speaker = 0.2;  // per utterance
  double noise = 0.1;    // per frame

  static SynthesisProfile create(int vocab_size, int feature_dim, Rng& rng);
  void validate() const;
};

// Emits dur ~ U[dur_min, dur_max] frames per phoneme, each prototype + occurrence jitter +
// utterance speaker offset + frame noise. T_a >= T_t always. No normalisation applied.
Matrix synthesize_utterance(const SynthesisProfile& profile, std::span<const int> phonemes, Rng& rng);

// Subtracts the per-utterance mean frame.
void mean_normalize(Matrix& features);

struct Segment {
  int keyword_id = 0;
  int utterance = 0;  // index into the owning corpus
};

struct Trial {
  int trial_id = 0;
  int keyword_id = 0;  // enrolled keyword (text side)
  int utterance = 0;   // test audio
  bool match = false;
};

struct TrialSet {
  std::vector<Trial> trials;
  std::vector<double> scores;  // empty until scored; else parallel to trials
  bool negatives_with_replacement = false;

  std::size_t positives() const;
  std::size_t negatives() const { return trials.size() - positives(); }
  std::vector<bool> labels() const;
};

// Every matching (enrolled keyword, segment) pair plus neg_ratio x positives mismatched pairs,
// drawn without replacement unless the mismatch pool is too small (flagged).
TrialSet generate_trials(std::span<const Segment> segments, std::span<const int> enrolled, int neg_ratio, Rng& rng);

enum class Split { kTrain, kEval };

struct Utterance {
  int keyword_id = 0;
  Split split = Split::kTrain;
  Matrix features;
};

struct CorpusConfig {
  std::uint64_t seed = 1234;
  int num_train_keywords = 200;
  int num_eval_keywords = 100;
  int utterances_per_keyword = 4;
  int vocab_size = 40;
  int feature_dim = 40;
  int min_phonemes = 3;
  int max_phonemes = 10;
  int dur_min = 2;
  int dur_max = 5;
  double jitter = 0.3;
  double speaker = 0.2;
  double noise = 0.1;
  bool mean_normalize = true;
};

// Keywords [0, num_train) are training classes, the rest are held out for evaluation.
struct Corpus {
  CorpusConfig config;
  Lexicon lexicon;
  std::vector<Split> keyword_split;
  std::vector<Utterance> utterances;

  std::vector<int> keywords(Split split) const;
  std::vector<Segment> segments(Split split) const;
};

Corpus generate_corpus(const CorpusConfig& cfg);

}  // namespace adml

#endif  // ADML_DATA_SYNTH_HPP_
