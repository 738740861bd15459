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

#include "adml/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "adml/alignment/cross_attention.hpp"
#include "adml/autodiff/ops.hpp"

namespace adml {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("train: " + what); };
  if (keywords_per_batch < 2) fail("keywords_per_batch must be >= 2");
  if (utterances_per_keyword < 2) fail("utterances_per_keyword must be >= 2");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(base_lr > 0.0)) fail("base_lr must be > 0");
  if (lr_halving_period < 1) fail("lr_halving_period must be >= 1");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!(grad_clip > 0.0)) fail("grad_clip must be > 0");
  if (losses.lambda_phn < 0.0) fail("lambda_phn must be >= 0");
  if (adv.lambda < 0.0) fail("lambda_adv must be >= 0");
  if (adv.hidden < 1) fail("adv hidden units must be >= 1");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw DomainError("lr_at: negative epoch");
  return cfg.base_lr * std::pow(0.5, epoch / cfg.lr_halving_period);
}

double embedding_loss(const EmbeddingTerms& t, double lambda_phn) { return t.utt + t.key + t.mm + lambda_phn * t.phn; }

void check_parameter_partition(Model& model) {
  std::set<std::string> names;
  std::set<const double*> addresses;
  std::size_t emb = 0;
  std::size_t mod = 0;
  model.visit([&](const std::string& name, Matrix& value, ParamGroup group) {
    if (!names.insert(name).second) throw StructuralError("parameter name visited twice: " + name);
    if (!addresses.insert(value.data()).second) throw StructuralError("parameter in two groups: " + name);
    (group == ParamGroup::kEmbedding ? emb : mod) += 1;
  });
  if (emb == 0 || mod == 0) throw StructuralError("parameter partition has an empty group");
}

TrainState init_train_state(const EncoderConfig& enc, const TrainConfig& cfg, int num_classes) {
  cfg.validate();
  TrainState s;
  s.model = Model::create(enc, cfg.losses, cfg.adv, num_classes, cfg.seed);
  check_parameter_partition(s.model);
  return s;
}

namespace {

std::vector<std::vector<int>> utterances_by_keyword(const Corpus& corpus) {
  std::vector<std::vector<int>> by(corpus.lexicon.sequences.size());
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    by.at(static_cast<std::size_t>(corpus.utterances[u].keyword_id)).push_back(static_cast<int>(u));
  }
  return by;
}

}  // namespace

std::vector<BatchPlan> plan_epoch(const Corpus& corpus, Split split, int P, int K, Rng& rng) {
  if (P < 1 || K < 1) throw StructuralError("plan_epoch: P and K must be positive");
  const auto by = utterances_by_keyword(corpus);
  std::vector<int> eligible;
  for (int k : corpus.keywords(split)) {
    if (static_cast<int>(by[static_cast<std::size_t>(k)].size()) >= K) eligible.push_back(k);
  }
  if (static_cast<int>(eligible.size()) < P) {
    std::ostringstream os;
    os << "corpus has " << eligible.size() << " keywords with >= " << K << " utterances, batch needs " << P
       << " (short by " << P - static_cast<int>(eligible.size()) << ")";
    throw StructuralError(os.str());
  }
  std::shuffle(eligible.begin(), eligible.end(), rng);
  std::vector<BatchPlan> plans;
  for (std::size_t start = 0; start + static_cast<std::size_t>(P) <= eligible.size();
       start += static_cast<std::size_t>(P)) {
    BatchPlan plan;
    for (std::size_t j = start; j < start + static_cast<std::size_t>(P); ++j) {
      std::vector<int> utts = by[static_cast<std::size_t>(eligible[j])];
      std::shuffle(utts.begin(), utts.end(), rng);
      plan.insert(plan.end(), utts.begin(), utts.begin() + K);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

PhonemeBatch make_batch(const Corpus& corpus, const BatchPlan& plan) {
  PhonemeBatch b;
  for (int u : plan) {
    const Utterance& utt = corpus.utterances.at(static_cast<std::size_t>(u));
    b.audio_features.push_back(utt.features);
    b.phoneme_ids.push_back(corpus.lexicon.phonemes(utt.keyword_id));
    b.keyword_ids.push_back(utt.keyword_id);
  }
  return b;
}

PhonemeBatch sample_batch(const Corpus& corpus, int P, int K, Rng& rng) {
  return make_batch(corpus, plan_epoch(corpus, Split::kTrain, P, K, rng).front());
}

namespace {

void require_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite loss term ") + term);
}

}  // namespace

GradientResult compute_gradients(Model& model, const PhonemeBatch& batch, const TrainConfig& cfg, LossTerms terms) {
  batch.validate(model.encoder.vocab_size, model.encoder.feature_dim);
  const LossConfig& lc = cfg.losses;
  const std::size_t n = batch.size();
  ad::Graph g;

  std::vector<ad::Var> audio_seq;
  std::vector<ad::Var> text_seq;
  std::vector<ad::Var> utt_a;
  std::vector<ad::Var> utt_t;
  for (std::size_t i = 0; i < n; ++i) {
    audio_seq.push_back(model.acoustic.forward(g, g.constant(batch.audio_features[i])));
    text_seq.push_back(model.text.forward(g, batch.phoneme_ids[i]));
    utt_a.push_back(model.ccsp.forward(g, audio_seq.back()));
    utt_t.push_back(gap_pool(text_seq.back()));
  }
  const ad::Var utt_audio = ad::concat_rows(utt_a);
  const ad::Var utt_text = ad::concat_rows(utt_t);

  const bool phn_level = lc.phoneme != PhonemeLossKind::kNone || cfg.adv.enabled_phn;
  ad::Var flat_audio;
  ad::Var flat_text;
  std::vector<int> flat_labels;
  std::vector<std::pair<ad::Var, double>> objective;
  StepMetrics m;

  if (phn_level) {
    std::vector<ad::Var> aligned;
    std::vector<ad::Var> mm;
    for (std::size_t i = 0; i < n; ++i) {
      AttentionVars att = cross_attend(text_seq[i], audio_seq[i]);
      aligned.push_back(att.aggregated);
      if (lc.monotonic_matching) mm.push_back(monotonic_matching_loss(att.affinity, true, lc.mm_width));
      flat_labels.insert(flat_labels.end(), batch.phoneme_ids[i].begin(), batch.phoneme_ids[i].end());
    }
    flat_audio = ad::concat_rows(aligned);
    flat_text = ad::concat_rows(text_seq);
    if (!mm.empty()) {
      ad::Var l_mm = ad::scale(ad::sum_all(ad::concat_rows(mm)), 1.0 / static_cast<double>(n));
      m.l_mm = l_mm.scalar();
      require_finite(m.l_mm, "L_MM");
      if (terms.embedding) objective.emplace_back(l_mm, 1.0);
    }
    if (lc.phoneme != PhonemeLossKind::kNone) {
      ad::Var l_phn = phoneme_loss(lc.phoneme, flat_audio, flat_text, flat_labels, model.asyp, lc.phn);
      m.l_phn = l_phn.scalar();
      require_finite(m.l_phn, "L_phn");
      if (terms.embedding) objective.emplace_back(l_phn, lc.lambda_phn);
    }
  }
  if (lc.utterance_rp) {
    ad::Var l_utt = utterance_rp_loss(utt_audio, utt_text, batch.keyword_ids, lc.rp_weights, lc.rp);
    m.l_utt = l_utt.scalar();
    require_finite(m.l_utt, "L_utt");
    if (terms.embedding) objective.emplace_back(l_utt, 1.0);
  }
  if (lc.classifier != ClassifierKind::kNone) {
    ad::Var l_key = keyword_loss(lc.classifier, model.head, utt_audio, batch.keyword_ids, lc.key_triplet_margin);
    m.l_key = l_key.scalar();
    require_finite(m.l_key, "L_key");
    if (terms.embedding) objective.emplace_back(l_key, 1.0);
  }

  const AdvLevels levels{cfg.adv.enabled_phn && phn_level, cfg.adv.enabled_utt};
  if (levels.phn || levels.utt) {
    const ad::Var fa = levels.phn ? ad::grl(flat_audio) : utt_audio;
    const ad::Var ft = levels.phn ? ad::grl(flat_text) : utt_text;
    AdvLoss adv = total_adv_loss(model.modality, fa, ft, ad::grl(utt_audio), ad::grl(utt_text), levels);
    m.l_adv_phn = adv.phn.scalar();
    m.l_adv_utt = adv.utt.scalar();
    require_finite(m.l_adv_phn, "L_adv_phn");
    require_finite(m.l_adv_utt, "L_adv_utt");
    if (terms.adversarial) objective.emplace_back(adv.total, cfg.adv.lambda);
  }

  m.total = embedding_loss({m.l_utt, m.l_key, m.l_mm, m.l_phn}, lc.lambda_phn);
  require_finite(m.total, "L_emb");
  {
    Matrix audio_rows = utt_audio.value();
    Matrix text_rows = utt_text.value();
    if (phn_level) {
      Matrix a(audio_rows.rows() + flat_audio.rows(), audio_rows.cols());
      a << audio_rows, flat_audio.value();
      Matrix t(text_rows.rows() + flat_text.rows(), text_rows.cols());
      t << text_rows, flat_text.value();
      audio_rows.swap(a);
      text_rows.swap(t);
    }
    m.modality_accuracy = modality_accuracy(model.modality, audio_rows, text_rows);
  }

  GradientResult out;
  if (!objective.empty()) {
    std::vector<ad::Var> parts;
    for (const auto& [v, w] : objective) parts.push_back(ad::scale(v, w));
    ad::Var total = ad::sum_all(ad::concat_rows(parts));
    m.objective = total.scalar();
    require_finite(m.objective, "objective");
    g.backward(total);
    double sq_emb = 0.0;
    double sq_mod = 0.0;
    model.visit([&](const std::string& name, Matrix& value, ParamGroup group) {
      if (!g.has_param_grad(value)) return;
      Matrix grad = g.param_grad(value);
      const double sq = grad.squaredNorm();
      if (!std::isfinite(sq)) throw NumericalError("non-finite gradient for " + name);
      (group == ParamGroup::kEmbedding ? sq_emb : sq_mod) += sq;
      out.grads.emplace(name, ParamGradient{group, std::move(grad)});
    });
    m.grad_norm_emb = std::sqrt(sq_emb);
    m.grad_norm_mod = std::sqrt(sq_mod);
  }
  out.metrics = m;
  return out;
}

StepMetrics train_step_inplace(TrainState& state, const PhonemeBatch& batch, const TrainConfig& cfg) {
  GradientResult r = compute_gradients(state.model, batch, cfg);
  const double norm = std::hypot(r.metrics.grad_norm_emb, r.metrics.grad_norm_mod);
  const double clip = norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
  const double lr = lr_at(state.epoch, cfg);
  const long t = state.step + 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));

  state.model.visit([&](const std::string& name, Matrix& p, ParamGroup) {
    auto it = r.grads.find(name);
    if (it == r.grads.end()) return;
    const Matrix grad = it->second.grad * clip;
    AdamMoments& mom = state.moments[name];
    if (mom.m.size() == 0) {
      mom.m = Matrix::Zero(p.rows(), p.cols());
      mom.v = Matrix::Zero(p.rows(), p.cols());
    }
    mom.m = cfg.adam_beta1 * mom.m + (1.0 - cfg.adam_beta1) * grad;
    mom.v = cfg.adam_beta2 * mom.v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
    p -= lr * cfg.weight_decay * p;
    p.array() -= lr * (mom.m.array() / bc1) / ((mom.v.array() / bc2).sqrt() + cfg.adam_eps);
  });
  state.model.asyp.clamp_lambda();
  state.step = t;
  return r.metrics;
}

std::pair<TrainState, StepMetrics> train_step(TrainState state, const PhonemeBatch& batch, const TrainConfig& cfg) {
  StepMetrics m = train_step_inplace(state, batch, cfg);
  return {std::move(state), m};
}

namespace {

void accumulate(StepMetrics& acc, const StepMetrics& m, double w) {
  acc.l_utt += w * m.l_utt;
  acc.l_key += w * m.l_key;
  acc.l_mm += w * m.l_mm;
  acc.l_phn += w * m.l_phn;
  acc.l_adv_phn += w * m.l_adv_phn;
  acc.l_adv_utt += w * m.l_adv_utt;
  acc.total += w * m.total;
  acc.objective += w * m.objective;
  acc.grad_norm_emb += w * m.grad_norm_emb;
  acc.grad_norm_mod += w * m.grad_norm_mod;
  acc.modality_accuracy += w * m.modality_accuracy;
}

}  // namespace

void fit(TrainState& state, const Corpus& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  while (state.epoch < cfg.epochs) {
    Rng rng = substream(cfg.seed, "batching/epoch/" + std::to_string(state.epoch));
    const auto plans = plan_epoch(corpus, Split::kTrain, cfg.keywords_per_batch, cfg.utterances_per_keyword, rng);
    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.lr = lr_at(state.epoch, cfg);
    rec.batches = static_cast<int>(plans.size());
    std::vector<StepMetrics> steps;
    for (const BatchPlan& plan : plans) steps.push_back(train_step_inplace(state, make_batch(corpus, plan), cfg));
    for (const StepMetrics& s : steps) accumulate(rec.mean, s, 1.0 / static_cast<double>(steps.size()));
    rec.step = state.step;
    state.epoch += 1;
    if (on_epoch) on_epoch(rec, state);
  }
}

}  // namespace adml
