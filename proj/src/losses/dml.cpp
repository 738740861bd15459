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

#include "adml/losses/dml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "adml/autodiff/ops.hpp"

namespace adml {

namespace {

double log1p_sum_exp(std::span<const double> z) {
  double m = 0.0;
  for (double v : z) m = std::max(m, v);
  double s = std::exp(-m);
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// Keeps softplus-reparameterised scales strictly positive where exp underflows; a no-op otherwise.
constexpr double kScaleFloor = std::numeric_limits<double>::min();

void check_flats(ad::Var audio, ad::Var text, std::span<const int> labels, const char* op) {
  if (audio.rows() != text.rows() || audio.cols() != text.cols()) {
    throw StructuralError(std::string(op) + ": audio and text flats differ in shape");
  }
  if (static_cast<Eigen::Index>(labels.size()) != audio.rows()) {
    throw StructuralError(std::string(op) + ": one label per flattened row required");
  }
  if (labels.empty()) throw StructuralError(std::string(op) + ": empty batch");
}

// mask(i, j) = 1 when labels agree (same == true) or differ (same == false).
Matrix label_mask(std::span<const int> labels, bool same) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = ((labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) == same) ? 1.0 : 0.0;
    }
  }
  return m;
}

// 1 / row count of the mask, or 0 for empty rows.
Matrix inverse_row_counts(const Matrix& mask) {
  Matrix out(mask.rows(), 1);
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    const double c = mask.row(i).sum();
    out(i, 0) = c > 0 ? 1.0 / c : 0.0;
  }
  return out;
}

// Per-anchor hyperparameter columns (N x 1).
struct AnchorParams {
  ad::Var alpha;
  ad::Var beta;
  ad::Var lambda;
};

AnchorParams anchor_params(ad::Graph& g, const AsyPParams& p, std::span<const int> labels) {
  std::vector<int> idx(labels.begin(), labels.end());
  if (!p.learnable) {
    std::fill(idx.begin(), idx.end(), 0);
  } else {
    for (int l : idx) {
      if (l < 0 || l >= p.alpha_raw.rows()) throw DomainError("AsyP: phoneme label " + std::to_string(l) + " out of range");
    }
  }
  auto bind = [&](const Matrix& m) { return p.learnable ? g.param(m) : g.constant(m); };
  auto positive = [&](const Matrix& raw) { return ad::add_scalar(ad::softplus(bind(raw)), kScaleFloor); };
  return {ad::gather_rows(positive(p.alpha_raw), idx), ad::gather_rows(positive(p.beta_raw), idx),
          ad::gather_rows(bind(p.lambda), idx)};
}

// ELSE over masked entries of `sims` per row: (1/a_i) ln(1 + sum exp(a_i (lam_i - s_ij))).
ad::Var else_rows(ad::Var sims, ad::Var a, ad::Var lam, const Matrix& mask) {
  ad::Var z = ad::mul_col(ad::add_col(ad::neg(sims), lam), a);
  return ad::mul_col(ad::log1p_sum_exp_rows(z, mask), ad::reciprocal(a));
}

// ELSE pushing away: (1/b_i) ln(1 + sum exp(b_i (s_ij - lam_i))).
ad::Var else_rows_negative(ad::Var sims, ad::Var b, ad::Var lam, const Matrix& mask) {
  ad::Var z = ad::mul_col(ad::add_col(sims, ad::neg(lam)), b);
  return ad::mul_col(ad::log1p_sum_exp_rows(z, mask), ad::reciprocal(b));
}

// Mean softplus over masked entries per row of z.
ad::Var msp_rows(ad::Var z, const Matrix& mask) {
  ad::Graph& g = *z.graph;
  ad::Var masked = ad::mul(ad::softplus(z), g.constant(mask));
  return ad::mul_col(ad::sum_over_cols(masked), g.constant(inverse_row_counts(mask)));
}

struct FlatVars {
  std::unique_ptr<ad::Graph> graph;
  ad::Var audio;
  ad::Var text;
};

FlatVars constants(const FlatEmbeddings& audio, const FlatEmbeddings& text) {
  if (audio.labels != text.labels) throw StructuralError("phoneme loss: audio and text flats carry different labels");
  FlatVars v{std::make_unique<ad::Graph>(), {}, {}};
  v.audio = v.graph->constant(audio.matrix);
  v.text = v.graph->constant(text.matrix);
  return v;
}

}  // namespace

double else_term(std::span<const double> sims, double alpha, double lam) {
  if (!(alpha > 0)) throw DomainError("else_term: alpha must be positive");
  if (sims.empty()) return 0.0;
  std::vector<double> z(sims.size());
  std::transform(sims.begin(), sims.end(), z.begin(), [&](double s) { return alpha * (lam - s); });
  return log1p_sum_exp(z) / alpha;
}

double msp_term(std::span<const double> sims, double beta, double lam) {
  if (!(beta > 0)) throw DomainError("msp_term: beta must be positive");
  if (sims.empty()) return 0.0;
  double acc = 0.0;
  for (double s : sims) acc += softplus(beta * (s - lam));
  return acc / static_cast<double>(sims.size());
}

ad::Var else_term(ad::Var sims, double alpha, double lam) {
  if (!(alpha > 0)) throw DomainError("else_term: alpha must be positive");
  if (sims.rows() != 1) throw StructuralError("else_term: expects a single row of similarities");
  ad::Graph& g = *sims.graph;
  const Matrix a = Matrix::Constant(1, 1, alpha);
  return else_rows(sims, g.constant(a), g.scalar_constant(lam), Matrix::Ones(1, sims.cols()));
}

ad::Var msp_term(ad::Var sims, double beta, double lam) {
  if (!(beta > 0)) throw DomainError("msp_term: beta must be positive");
  if (sims.rows() != 1) throw StructuralError("msp_term: expects a single row of similarities");
  return msp_rows(ad::scale(ad::add_scalar(sims, -lam), beta), Matrix::Ones(1, sims.cols()));
}

double softplus_inverse(double y) {
  if (!(y > 0)) throw DomainError("softplus_inverse: argument must be positive");
  return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

AsyPParams AsyPParams::fixed(double alpha, double beta, double lambda) {
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("AsyPParams: alpha and beta must be positive");
  return {false, Matrix::Constant(1, 1, softplus_inverse(alpha)), Matrix::Constant(1, 1, softplus_inverse(beta)),
          Matrix::Constant(1, 1, std::clamp(lambda, -1.0, 1.0))};
}

AsyPParams AsyPParams::adaptive(int vocab_size, double alpha, double beta, double lambda) {
  AsyPParams p = fixed(alpha, beta, lambda);
  p.learnable = true;
  p.alpha_raw = Matrix::Constant(vocab_size, 1, p.alpha_raw(0, 0));
  p.beta_raw = Matrix::Constant(vocab_size, 1, p.beta_raw(0, 0));
  p.lambda = Matrix::Constant(vocab_size, 1, p.lambda(0, 0));
  return p;
}

double AsyPParams::alpha(int phoneme) const { return softplus(alpha_raw(learnable ? phoneme : 0, 0)) + kScaleFloor; }
double AsyPParams::beta(int phoneme) const { return softplus(beta_raw(learnable ? phoneme : 0, 0)) + kScaleFloor; }
double AsyPParams::lambda_of(int phoneme) const { return lambda(learnable ? phoneme : 0, 0); }

void AsyPParams::clamp_lambda() { lambda = lambda.cwiseMax(-1.0).cwiseMin(1.0); }

void AsyPParams::visit(const std::string& prefix, const ParamVisitor& f) {
  if (!learnable) return;
  f(prefix + "/alpha_raw", alpha_raw);
  f(prefix + "/beta_raw", beta_raw);
  f(prefix + "/lambda", lambda);
}

PhonemeLossKind parse_phoneme_loss(std::string_view key) {
  static const std::map<std::string, PhonemeLossKind, std::less<>> kRegistry = {
      {"none", PhonemeLossKind::kNone},         {"asyp", PhonemeLossKind::kAsyP},
      {"asyp_adams", PhonemeLossKind::kAsyPAdaMS}, {"proxy_ms", PhonemeLossKind::kProxyMS},
      {"proxy_bd", PhonemeLossKind::kProxyBD},  {"clat", PhonemeLossKind::kClat},
      {"triplet", PhonemeLossKind::kTriplet}};
  auto it = kRegistry.find(key);
  if (it == kRegistry.end()) throw StructuralError("unknown phoneme loss '" + std::string(key) + "'");
  return it->second;
}

std::string_view to_string(PhonemeLossKind kind) {
  switch (kind) {
    case PhonemeLossKind::kNone: return "none";
    case PhonemeLossKind::kAsyP: return "asyp";
    case PhonemeLossKind::kAsyPAdaMS: return "asyp_adams";
    case PhonemeLossKind::kProxyMS: return "proxy_ms";
    case PhonemeLossKind::kProxyBD: return "proxy_bd";
    case PhonemeLossKind::kClat: return "clat";
    case PhonemeLossKind::kTriplet: return "triplet";
  }
  return "unknown";
}

ad::Var asyp_phoneme_loss(ad::Var flat_audio, ad::Var flat_text, std::span<const int> labels,
                          const AsyPParams& params) {
  check_flats(flat_audio, flat_text, labels, "asyp_phoneme_loss");
  ad::Graph& g = *flat_audio.graph;
  AnchorParams ap = anchor_params(g, params, labels);
  ad::Var text_to_audio = ad::pairwise_cosine(flat_text, flat_audio);  // S(E_t,i, E_a,j)
  ad::Var audio_to_text = ad::transpose(text_to_audio);               // S(E_a,i, E_t,k)
  ad::Var pull = else_rows(text_to_audio, ap.alpha, ap.lambda, label_mask(labels, true));
  ad::Var push = msp_rows(ad::mul_col(ad::add_col(audio_to_text, ad::neg(ap.lambda)), ap.beta),
                          label_mask(labels, false));
  return ad::mean_all(ad::add(pull, push));
}

double asyp_phoneme_loss(const FlatEmbeddings& flat_audio, const FlatEmbeddings& flat_text, const AsyPParams& params) {
  FlatVars v = constants(flat_audio, flat_text);
  return asyp_phoneme_loss(v.audio, v.text, flat_audio.labels, params).scalar();
}

ad::Var triplet_hinge(ad::Var sims, std::span<const int> labels, double margin, bool exclude_self) {
  const Matrix& s = sims.value();
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (s.rows() != n || s.cols() != n) throw StructuralError("triplet_hinge: similarity matrix must be N x N");
  Matrix grad_unit = Matrix::Zero(n, n);
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels[static_cast<std::size_t>(j)] != labels[static_cast<std::size_t>(i)]) continue;
      if (exclude_self && j == i) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (labels[static_cast<std::size_t>(k)] == labels[static_cast<std::size_t>(i)]) continue;
        ++count;
        const double v = margin + s(i, k) - s(i, j);
        if (v > 0) {
          total += v;
          grad_unit(i, k) += 1.0;
          grad_unit(i, j) -= 1.0;
        }
      }
    }
  }
  const double inv = count > 0 ? 1.0 / static_cast<double>(count) : 0.0;
  grad_unit *= inv;
  return sims.graph->record(Matrix::Constant(1, 1, total * inv), {sims},
                            [sims, grad_unit = std::move(grad_unit)](ad::Graph& g, const Matrix& go) {
                              g.accumulate(sims, grad_unit * go(0, 0));
                            });
}

ad::Var phoneme_loss(PhonemeLossKind kind, ad::Var flat_audio, ad::Var flat_text, std::span<const int> labels,
                     const AsyPParams& params, const PhonemeLossOptions& opts) {
  switch (kind) {
    case PhonemeLossKind::kAsyP:
    case PhonemeLossKind::kAsyPAdaMS:
      return asyp_phoneme_loss(flat_audio, flat_text, labels, params);
    case PhonemeLossKind::kNone:
      throw StructuralError("phoneme_loss: kind 'none' has no loss");
    default:
      break;
  }
  check_flats(flat_audio, flat_text, labels, "baseline_phoneme_loss");
  ad::Graph& g = *flat_audio.graph;
  const Matrix pos = label_mask(labels, true);
  const Matrix negm = label_mask(labels, false);
  ad::Var text_to_audio = ad::pairwise_cosine(flat_text, flat_audio);
  switch (kind) {
    case PhonemeLossKind::kProxyMS: {
      AnchorParams ap = anchor_params(g, params, labels);
      ad::Var audio_to_text = ad::transpose(text_to_audio);
      ad::Var pull = else_rows(text_to_audio, ap.alpha, ap.lambda, pos);
      ad::Var push = else_rows_negative(audio_to_text, ap.beta, ap.lambda, negm);
      return ad::mean_all(ad::add(pull, push));
    }
    case PhonemeLossKind::kProxyBD: {
      AnchorParams ap = anchor_params(g, params, labels);
      ad::Var audio_to_text = ad::transpose(text_to_audio);
      ad::Var pull = msp_rows(ad::mul_col(ad::add_col(ad::neg(text_to_audio), ap.lambda), ap.alpha), pos);
      ad::Var push = msp_rows(ad::mul_col(ad::add_col(audio_to_text, ad::neg(ap.lambda)), ap.beta), negm);
      return ad::mean_all(ad::add(pull, push));
    }
    case PhonemeLossKind::kClat: {
      ad::Var logits = ad::scale(text_to_audio, 1.0 / opts.infonce_tau);
      ad::Var lse = ad::logsumexp_rows(logits);
      ad::Var pos_mean = ad::mul_col(ad::sum_over_cols(ad::mul(logits, g.constant(pos))),
                                     g.constant(inverse_row_counts(pos)));
      return ad::mean_all(ad::sub(lse, pos_mean));
    }
    case PhonemeLossKind::kTriplet:
      return triplet_hinge(text_to_audio, labels, opts.triplet_margin, false);
    default:
      throw StructuralError("phoneme_loss: unsupported kind");
  }
}

double baseline_phoneme_loss(PhonemeLossKind kind, const FlatEmbeddings& flat_audio, const FlatEmbeddings& flat_text,
                             const AsyPParams& params, const PhonemeLossOptions& opts) {
  FlatVars v = constants(flat_audio, flat_text);
  return phoneme_loss(kind, v.audio, v.text, flat_audio.labels, params, opts).scalar();
}

namespace {

Matrix upper_pair_mask(Eigen::Index n) {
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = 1.0;
  }
  return m;
}

void check_pair(ad::Var ae, ad::Var te, const char* op) {
  if (ae.rows() != te.rows() || ae.cols() != te.cols()) {
    throw StructuralError(std::string(op) + ": AE and TE batches differ in shape");
  }
}

}  // namespace

ad::Var rp_distance_loss(ad::Var ae, ad::Var te, const RpOptions& opts) {
  check_pair(ae, te, "rp_distance_loss");
  const Eigen::Index n = ae.rows();
  if (n < 2) throw DomainError("rp_distance_loss: need at least 2 samples");
  ad::Graph& g = *ae.graph;
  const Matrix pairs = upper_pair_mask(n);
  const double num_pairs = static_cast<double>(n * (n - 1) / 2);

  ad::Var student = ad::pairwise_distances(ae);
  ad::Var student_mean = ad::scale(ad::sum_all(ad::mul(student, g.constant(pairs))), 1.0 / num_pairs);
  ad::Var student_norm = ad::scale_by(student, ad::reciprocal(student_mean));

  ad::Var teacher = ad::pairwise_distances(ad::stop_gradient(te));
  const double teacher_mean = teacher.value().cwiseProduct(pairs).sum() / num_pairs;
  if (teacher_mean == 0.0) throw DomainError("rp_distance_loss: all text embeddings coincide");
  ad::Var teacher_norm = g.constant(teacher.value() / teacher_mean);

  ad::Var diff = ad::huber(ad::sub(student_norm, teacher_norm), opts.huber_delta);
  return ad::scale(ad::sum_all(ad::mul(diff, g.constant(pairs))), 1.0 / num_pairs);
}

ad::Var rp_angle_loss(ad::Var ae, ad::Var te, const RpOptions& opts) {
  check_pair(ae, te, "rp_angle_loss");
  const Eigen::Index n = ae.rows();
  if (n < 3) throw DomainError("rp_angle_loss: need at least 3 samples");
  ad::Graph& g = *ae.graph;
  const Matrix& tv = te.value();
  std::vector<ad::Var> terms;
  double count = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    std::vector<int> others;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != a) others.push_back(static_cast<int>(i));
    }
    const std::vector<int> anchor_idx(others.size(), static_cast<int>(a));
    const auto m = static_cast<Eigen::Index>(others.size());

    // Teacher angles; an edge of zero length has no direction, so its triplets are skipped.
    Matrix t_dir(m, tv.cols());
    std::vector<bool> valid(others.size());
    for (Eigen::Index r = 0; r < m; ++r) {
      RowVector d = tv.row(others[static_cast<std::size_t>(r)]) - tv.row(a);
      const double len = d.norm();
      valid[static_cast<std::size_t>(r)] = len > 0.0;
      t_dir.row(r) = len > 0.0 ? RowVector(d / len) : RowVector::Zero(tv.cols());
    }
    Matrix teacher_cos = t_dir * t_dir.transpose();
    Matrix mask = Matrix::Zero(m, m);
    for (Eigen::Index u = 0; u < m; ++u) {
      for (Eigen::Index v = 0; v < m; ++v) {
        if (u != v && valid[static_cast<std::size_t>(u)] && valid[static_cast<std::size_t>(v)]) mask(u, v) = 1.0;
      }
    }
    const double c = mask.sum();
    if (c == 0.0) continue;
    count += c;

    ad::Var diff = ad::sub(ad::gather_rows(ae, others), ad::gather_rows(ae, anchor_idx));
    ad::Var dir = ad::row_normalize(diff);
    ad::Var student_cos = ad::matmul_nt(dir, dir);
    ad::Var h = ad::huber(ad::sub(student_cos, g.constant(teacher_cos)), opts.huber_delta);
    terms.push_back(ad::sum_all(ad::mul(h, g.constant(mask))));
  }
  if (terms.empty()) return g.scalar_constant(0.0);
  return ad::scale(ad::sum_all(ad::concat_rows(terms)), 1.0 / count);
}

ad::Var rp_proto_loss(ad::Var ae, ad::Var te, std::span<const int> keyword_ids, const RpOptions& opts) {
  check_pair(ae, te, "rp_proto_loss");
  const Eigen::Index n = ae.rows();
  if (n == 0) throw StructuralError("rp_proto_loss: empty batch");
  if (static_cast<Eigen::Index>(keyword_ids.size()) != n) {
    throw StructuralError("rp_proto_loss: one keyword id per sample required");
  }
  ad::Graph& g = *ae.graph;
  std::map<int, int> class_of;
  for (int k : keyword_ids) class_of.emplace(k, 0);
  int c = 0;
  for (auto& [k, idx] : class_of) idx = c++;

  const Matrix& tv = te.value();
  Matrix protos = Matrix::Zero(c, tv.cols());
  std::vector<double> counts(static_cast<std::size_t>(c), 0.0);
  std::vector<int> target(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int cls = class_of.at(keyword_ids[static_cast<std::size_t>(i)]);
    target[static_cast<std::size_t>(i)] = cls;
    protos.row(cls) += tv.row(i);
    counts[static_cast<std::size_t>(cls)] += 1.0;
  }
  for (int k = 0; k < c; ++k) protos.row(k) /= counts[static_cast<std::size_t>(k)];

  ad::Var logits = ad::scale(ad::pairwise_cosine(ae, g.constant(protos)), 1.0 / opts.proto_tau);
  return ad::neg(ad::mean_all(ad::pick(ad::log_softmax_rows(logits), target)));
}

ad::Var utterance_rp_loss(ad::Var ae, ad::Var te, std::span<const int> keyword_ids, const RpLossWeights& weights,
                          const RpOptions& opts) {
  if (weights.dist < 0 || weights.angle < 0 || weights.proto < 0) {
    throw DomainError("utterance_rp_loss: weights must be nonnegative");
  }
  ad::Var total = ae.graph->scalar_constant(0.0);
  if (weights.dist > 0) total = ad::add(total, ad::scale(rp_distance_loss(ae, te, opts), weights.dist));
  if (weights.angle > 0) total = ad::add(total, ad::scale(rp_angle_loss(ae, te, opts), weights.angle));
  if (weights.proto > 0) total = ad::add(total, ad::scale(rp_proto_loss(ae, te, keyword_ids, opts), weights.proto));
  return total;
}

double rp_distance_loss(const Matrix& ae, const Matrix& te, const RpOptions& opts) {
  ad::Graph g;
  return rp_distance_loss(g.constant(ae), g.constant(te), opts).scalar();
}

double rp_angle_loss(const Matrix& ae, const Matrix& te, const RpOptions& opts) {
  ad::Graph g;
  return rp_angle_loss(g.constant(ae), g.constant(te), opts).scalar();
}

double rp_proto_loss(const Matrix& ae, const Matrix& te, std::span<const int> keyword_ids, const RpOptions& opts) {
  ad::Graph g;
  return rp_proto_loss(g.constant(ae), g.constant(te), keyword_ids, opts).scalar();
}

double utterance_rp_loss(const Matrix& ae, const Matrix& te, std::span<const int> keyword_ids,
                         const RpLossWeights& weights, const RpOptions& opts) {
  ad::Graph g;
  return utterance_rp_loss(g.constant(ae), g.constant(te), keyword_ids, weights, opts).scalar();
}

}  // namespace adml
