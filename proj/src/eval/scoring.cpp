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

#include "adml/eval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "adml/adversarial/modality.hpp"
#include "adml/alignment/cross_attention.hpp"
#include "adml/autodiff/ops.hpp"
#include "adml/core/batch.hpp"
#include "adml/eval/metrics.hpp"

namespace adml {

MetricReport compute_metrics(const TrialSet& trials) {
  if (trials.scores.size() != trials.trials.size()) throw StructuralError("compute_metrics: trials are not scored");
  const std::vector<bool> labels = trials.labels();
  MetricReport r;
  r.ap = average_precision(trials.scores, labels);
  r.eer = eer(trials.scores, labels);
  r.auc = auc(trials.scores, labels);
  r.positives = trials.positives();
  r.negatives = trials.negatives();
  return r;
}

TrialSet score_trials(const Model& model, const Corpus& corpus, TrialSet trials) {
  std::map<int, RowVector> audio;
  std::map<int, RowVector> text;
  trials.scores.clear();
  trials.scores.reserve(trials.trials.size());
  for (const Trial& t : trials.trials) {
    auto a = audio.find(t.utterance);
    if (a == audio.end()) {
      a = audio.emplace(t.utterance, model.embed_audio(corpus.utterances.at(static_cast<std::size_t>(t.utterance)).features))
              .first;
    }
    auto e = text.find(t.keyword_id);
    if (e == text.end()) e = text.emplace(t.keyword_id, model.embed_text(corpus.lexicon.phonemes(t.keyword_id))).first;
    trials.scores.push_back(cosine_sim(e->second, a->second));
  }
  return trials;
}

TrialSet eval_trials(const Corpus& corpus, int neg_ratio, std::uint64_t seed) {
  Rng rng = substream(seed, "eval/trials");
  const std::vector<Segment> segs = corpus.segments(Split::kEval);
  const std::vector<int> enrolled = corpus.keywords(Split::kEval);
  if (enrolled.empty()) throw StructuralError("corpus has no eval split");
  return generate_trials(segs, enrolled, neg_ratio, rng);
}

EmbeddingPairs frozen_embeddings(const Model& model, const Corpus& corpus, Split split) {
  std::vector<RowVector> audio;
  std::vector<RowVector> text;
  for (const Utterance& u : corpus.utterances) {
    if (u.split != split) continue;
    ad::Graph g;
    const auto& ids = corpus.lexicon.phonemes(u.keyword_id);
    ad::Var a_seq = model.acoustic.forward(g, g.constant(u.features));
    ad::Var t_seq = model.text.forward(g, ids);
    audio.push_back(model.ccsp.forward(g, a_seq).value().row(0));
    text.push_back(gap_pool(t_seq).value().row(0));
    const Matrix aligned = cross_attend(t_seq, a_seq).aggregated.value();
    const Matrix& tv = t_seq.value();
    for (Eigen::Index i = 0; i < tv.rows(); ++i) {
      audio.push_back(aligned.row(i));
      text.push_back(tv.row(i));
    }
  }
  if (audio.empty()) throw StructuralError("frozen_embeddings: split is empty");
  EmbeddingPairs out{Matrix(audio.size(), audio.front().size()), Matrix(text.size(), text.front().size())};
  for (std::size_t i = 0; i < audio.size(); ++i) out.audio.row(static_cast<Eigen::Index>(i)) = audio[i];
  for (std::size_t i = 0; i < text.size(); ++i) out.text.row(static_cast<Eigen::Index>(i)) = text[i];
  return out;
}

namespace {

Matrix take(const Matrix& m, const std::vector<int>& idx, std::size_t begin, std::size_t end) {
  Matrix out(static_cast<Eigen::Index>(end - begin), m.cols());
  for (std::size_t i = begin; i < end; ++i) out.row(static_cast<Eigen::Index>(i - begin)) = m.row(idx[i]);
  return out;
}

}  // namespace

ProbeResult train_modality_probe(const EmbeddingPairs& data, const ProbeConfig& cfg, std::uint64_t seed) {
  Rng rng = substream(seed, "probe");
  auto split_rows = [&](const Matrix& m, Matrix& train, Matrix& test) {
    std::vector<int> idx(static_cast<std::size_t>(m.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto cut = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(idx.size())));
    train = take(m, idx, 0, cut);
    test = take(m, idx, cut, idx.size());
  };
  Matrix a_train, a_test, t_train, t_test;
  split_rows(data.audio, a_train, a_test);
  split_rows(data.text, t_train, t_test);

  ModalityClassifier probe = ModalityClassifier::create(static_cast<int>(data.audio.cols()), cfg.hidden, rng);
  std::vector<Matrix*> params{&probe.hidden.weight, &probe.hidden.bias, &probe.output.weight, &probe.output.bias};
  std::vector<Matrix> m1, m2;
  for (Matrix* p : params) {
    m1.push_back(Matrix::Zero(p->rows(), p->cols()));
    m2.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  for (int step = 1; step <= cfg.steps; ++step) {
    ad::Graph g;
    ad::Var loss = modality_nll(probe, g.constant(a_train), g.constant(t_train));
    g.backward(loss);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Matrix grad = g.param_grad(*params[i]);
      m1[i] = b1 * m1[i] + (1 - b1) * grad;
      m2[i] = b2 * m2[i] + (1 - b2) * grad.cwiseProduct(grad);
      const double c1 = 1 - std::pow(b1, step);
      const double c2 = 1 - std::pow(b2, step);
      params[i]->array() -= cfg.lr * (m1[i].array() / c1) / ((m2[i].array() / c2).sqrt() + 1e-8);
    }
  }
  return {modality_accuracy(probe, a_train, t_train), modality_accuracy(probe, a_test, t_test)};
}

}  // namespace adml
