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

#include "adml/data/synth.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace adml {

namespace {

// Number of sequences with lengths in [min_len, max_len], saturating at `cap`.
std::uint64_t sequence_count(int vocab, int min_len, int max_len, std::uint64_t cap) {
  std::uint64_t total = 0;
  for (int len = min_len; len <= max_len; ++len) {
    std::uint64_t n = 1;
    for (int i = 0; i < len && n <= cap; ++i) n *= static_cast<std::uint64_t>(vocab);
    total += std::min(n, cap);
    if (total >= cap) return cap;
  }
  return total;
}

std::vector<int> decode_sequence(std::uint64_t code, int vocab, int min_len, int max_len) {
  for (int len = min_len; len <= max_len; ++len) {
    std::uint64_t n = 1;
    for (int i = 0; i < len; ++i) n *= static_cast<std::uint64_t>(vocab);
    if (code < n) {
      std::vector<int> seq(static_cast<std::size_t>(len));
      for (int i = len - 1; i >= 0; --i) {
        seq[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint64_t>(vocab));
        code /= static_cast<std::uint64_t>(vocab);
      }
      return seq;
    }
    code -= n;
  }
  return {};
}

}  // namespace

Lexicon build_lexicon(int num_keywords, int vocab_size, int min_len, int max_len, Rng& rng) {
  if (num_keywords < 0 || vocab_size < 1 || min_len < 1 || max_len < min_len) {
    throw StructuralError("build_lexicon: invalid size or length range");
  }
  constexpr std::uint64_t kEnumerateLimit = 1u << 20;
  const std::uint64_t available = sequence_count(vocab_size, min_len, max_len, UINT64_MAX / 2);
  if (static_cast<std::uint64_t>(num_keywords) > available) {
    throw StructuralError("build_lexicon: only " + std::to_string(available) + " distinct sequences exist, " +
                          std::to_string(num_keywords) + " requested");
  }
  Lexicon lex;
  lex.vocab_size = vocab_size;
  if (available <= kEnumerateLimit) {
    std::vector<std::uint64_t> codes(available);
    std::iota(codes.begin(), codes.end(), 0);
    for (int i = 0; i < num_keywords; ++i) {
      std::uniform_int_distribution<std::uint64_t> pick(static_cast<std::uint64_t>(i), available - 1);
      std::swap(codes[static_cast<std::size_t>(i)], codes[pick(rng)]);
      lex.sequences.push_back(decode_sequence(codes[static_cast<std::size_t>(i)], vocab_size, min_len, max_len));
    }
    return lex;
  }
  std::uniform_int_distribution<int> length(min_len, max_len);
  std::uniform_int_distribution<int> phoneme(0, vocab_size - 1);
  std::set<std::vector<int>> seen;
  while (lex.size() < num_keywords) {
    std::vector<int> seq(static_cast<std::size_t>(length(rng)));
    for (int& p : seq) p = phoneme(rng);
    if (seen.insert(seq).second) lex.sequences.push_back(std::move(seq));
  }
  return lex;
}

SynthesisProfile SynthesisProfile::create(int vocab_size, int feature_dim, Rng& rng) {
  SynthesisProfile p;
  std::normal_distribution<double> unit(0.0, 1.0);
  p.prototypes.resize(vocab_size, feature_dim);
  for (Eigen::Index i = 0; i < p.prototypes.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.prototypes.cols(); ++j) p.prototypes(i, j) = unit(rng);
  }
  return p;
}

void SynthesisProfile::validate() const {
  if (dur_min < 1 || dur_max < dur_min) throw StructuralError("SynthesisProfile: need 1 <= dur_min <= dur_max");
  if (jitter < 0 || speaker < 0 || noise < 0) throw DomainError("SynthesisProfile: noise scales must be >= 0");
}

Matrix synthesize_utterance(const SynthesisProfile& profile, std::span<const int> phonemes, Rng& rng) {
  if (phonemes.empty()) throw StructuralError("synthesize_utterance: empty phoneme sequence");
  profile.validate();
  const Eigen::Index f = profile.prototypes.cols();
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> duration(profile.dur_min, profile.dur_max);
  auto gaussian_row = [&](double sigma) {
    RowVector r(f);
    for (Eigen::Index j = 0; j < f; ++j) r(j) = sigma * unit(rng);
    return r;
  };

  const RowVector speaker = gaussian_row(profile.speaker);
  std::vector<RowVector> frames;
  for (int p : phonemes) {
    if (p < 0 || p >= profile.prototypes.rows()) throw DomainError("synthesize_utterance: phoneme id out of range");
    const int dur = duration(rng);
    const RowVector centre = profile.prototypes.row(p) + gaussian_row(profile.jitter) + speaker;
    for (int k = 0; k < dur; ++k) frames.push_back(centre + gaussian_row(profile.noise));
  }
  Matrix out(static_cast<Eigen::Index>(frames.size()), f);
  for (std::size_t t = 0; t < frames.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = frames[t];
  return out;
}

void mean_normalize(Matrix& features) {
  if (features.rows() == 0) return;
  const RowVector mean = features.colwise().mean();
  features.rowwise() -= mean;
}

std::size_t TrialSet::positives() const {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const Trial& t) { return t.match; }));
}

std::vector<bool> TrialSet::labels() const {
  std::vector<bool> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.match);
  return out;
}

TrialSet generate_trials(std::span<const Segment> segments, std::span<const int> enrolled, int neg_ratio, Rng& rng) {
  if (neg_ratio < 0) throw DomainError("generate_trials: negative ratio must be >= 0");
  TrialSet set;
  for (int k : enrolled) {
    const bool has = std::any_of(segments.begin(), segments.end(), [k](const Segment& s) { return s.keyword_id == k; });
    if (!has) throw StructuralError("generate_trials: enrolled keyword " + std::to_string(k) + " has no segment");
  }
  for (int k : enrolled) {
    for (const auto& s : segments) {
      if (s.keyword_id == k) set.trials.push_back({0, k, s.utterance, true});
    }
  }
  if (set.trials.empty()) throw StructuralError("generate_trials: no positive pairs");

  const std::size_t needed = set.trials.size() * static_cast<std::size_t>(neg_ratio);
  std::vector<std::pair<int, int>> pool;  // (enrolled index, segment index)
  if (needed > 0) {
    for (std::size_t e = 0; e < enrolled.size(); ++e) {
      for (std::size_t s = 0; s < segments.size(); ++s) {
        if (segments[s].keyword_id != enrolled[e]) pool.emplace_back(static_cast<int>(e), static_cast<int>(s));
      }
    }
    if (pool.empty()) throw StructuralError("generate_trials: no mismatched pairs to draw negatives from");
  }
  auto push_negative = [&](const std::pair<int, int>& p) {
    set.trials.push_back({0, enrolled[static_cast<std::size_t>(p.first)],
                          segments[static_cast<std::size_t>(p.second)].utterance, false});
  };
  if (needed <= pool.size()) {
    for (std::size_t i = 0; i < needed; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      push_negative(pool[i]);
    }
  } else {
    set.negatives_with_replacement = true;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t i = 0; i < needed; ++i) push_negative(pool[pick(rng)]);
  }
  for (std::size_t i = 0; i < set.trials.size(); ++i) set.trials[i].trial_id = static_cast<int>(i);
  return set;
}

std::vector<int> Corpus::keywords(Split split) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < keyword_split.size(); ++k) {
    if (keyword_split[k] == split) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<Segment> Corpus::segments(Split split) const {
  std::vector<Segment> out;
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    if (utterances[u].split == split) out.push_back({utterances[u].keyword_id, static_cast<int>(u)});
  }
  return out;
}

Corpus generate_corpus(const CorpusConfig& cfg) {
  if (cfg.num_train_keywords < 0 || cfg.num_eval_keywords < 0 || cfg.utterances_per_keyword < 1) {
    throw StructuralError("generate_corpus: invalid corpus sizes");
  }
  Corpus c;
  c.config = cfg;
  Rng lex_rng = substream(cfg.seed, "data/lexicon");
  c.lexicon = build_lexicon(cfg.num_train_keywords + cfg.num_eval_keywords, cfg.vocab_size, cfg.min_phonemes,
                            cfg.max_phonemes, lex_rng);
  Rng proto_rng = substream(cfg.seed, "data/prototypes");
  SynthesisProfile profile = SynthesisProfile::create(cfg.vocab_size, cfg.feature_dim, proto_rng);
  profile.dur_min = cfg.dur_min;
  profile.dur_max = cfg.dur_max;
  profile.jitter = cfg.jitter;
  profile.speaker = cfg.speaker;
  profile.noise = cfg.noise;
  profile.validate();

  for (int k = 0; k < c.lexicon.size(); ++k) {
    const Split split = k < cfg.num_train_keywords ? Split::kTrain : Split::kEval;
    c.keyword_split.push_back(split);
    for (int u = 0; u < cfg.utterances_per_keyword; ++u) {
      Rng rng = substream(cfg.seed, "data/utt/" + std::to_string(k) + "/" + std::to_string(u));
      Utterance utt{k, split, synthesize_utterance(profile, c.lexicon.phonemes(k), rng)};
      if (cfg.mean_normalize) mean_normalize(utt.features);
      c.utterances.push_back(std::move(utt));
    }
  }
  return c;
}

}  // namespace adml
