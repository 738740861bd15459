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

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "adml/autodiff/ops.hpp"
#include "adml/losses/dml.hpp"
#include "loss_oracles.hpp"
#include "oracles.hpp"

using namespace adml;
using namespace oracle;

namespace {

Matrix random_rotation(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(oracle::gaussian(d, d, rng));
  return qr.householderQ();
}

const std::vector<int> kSixLabels = {0, 1, 2, 0, 1, 0};

}  // namespace

TEST_CASE("else_term and msp_term examples") {
  const double lam = 0.01;
  const std::vector<double> at_lam = {lam};
  CHECK(else_term(at_lam, 0.01, lam) == doctest::Approx(std::log(2.0) / 0.01).epsilon(1e-12));
  CHECK(else_term(at_lam, 0.01, lam) == doctest::Approx(69.3147).epsilon(1e-6));
  CHECK(else_term(std::vector<double>{}, 0.01, lam) == 0.0);
  CHECK(msp_term(at_lam, 1.5, lam) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(msp_term(at_lam, 7.0, lam) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(msp_term(std::vector<double>{}, 1.5, lam) == 0.0);

  const std::vector<double> two = {0.5, -0.2};
  CHECK(else_term(two, 0.01, lam) == doctest::Approx(static_cast<double>(else_ld(two, 0.01L, 0.01L))).epsilon(1e-13));
  CHECK(msp_term(two, 1.5, lam) == doctest::Approx(static_cast<double>(msp_ld(two, 1.5L, 0.01L))).epsilon(1e-13));
  CHECK(msp_term(two, 1.5, lam) == doctest::Approx(0.83728).epsilon(1e-4));

  CHECK_THROWS_AS(else_term(two, 0.0, lam), DomainError);
  CHECK_THROWS_AS(msp_term(two, -1.0, lam), DomainError);
}

TEST_CASE("else_term decreases and msp_term increases in each similarity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(5);
    for (double& v : s) v = u(rng);
    const std::size_t k = static_cast<std::size_t>(trial) % s.size();
    std::vector<double> up = s;
    up[k] += 0.05;
    CHECK(else_term(up, 0.5, 0.1) < else_term(s, 0.5, 0.1));
    CHECK(msp_term(up, 1.5, 0.1) > msp_term(s, 1.5, 0.1));
  }
}

TEST_CASE("differentiable else_term and msp_term") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix s = oracle::gaussian(1, 2 + trial, rng, 0.5);
    const std::vector<double> v(s.data(), s.data() + s.size());
    ad::Graph g;
    CHECK(else_term(g.constant(s), 0.7, 0.1).scalar() == doctest::Approx(else_term(v, 0.7, 0.1)).epsilon(1e-14));
    CHECK(msp_term(g.constant(s), 1.5, 0.1).scalar() == doctest::Approx(msp_term(v, 1.5, 0.1)).epsilon(1e-14));
    CHECK(oracle::grad_check([](ad::Graph&, ad::Var x) { return else_term(x, 0.7, 0.1); }, s) < 1e-4);
    CHECK(oracle::grad_check([](ad::Graph&, ad::Var x) { return msp_term(x, 1.5, 0.1); }, s) < 1e-4);
  }
}

TEST_CASE("asyp single phoneme at the boundary") {
  AsyPParams p = AsyPParams::fixed(0.01, 1.5, 0.01);
  // Rows with cosine exactly 0.01 between text and audio.
  const double c = 0.01;
  FlatEmbeddings a{Matrix(1, 2), {0}}, t{Matrix(1, 2), {0}};
  t.matrix << 1, 0;
  a.matrix << c, std::sqrt(1 - c * c);
  CHECK(asyp_phoneme_loss(a, t, p) == doctest::Approx(100 * std::log(2.0)).epsilon(1e-10));

  // Saturated margins: identical positives, opposite negatives.
  FlatEmbeddings a2{Matrix(2, 2), {0, 1}}, t2{Matrix(2, 2), {0, 1}};
  t2.matrix << 1, 0, -1, 0;
  a2.matrix = t2.matrix;
  const double saturated = asyp_phoneme_loss(a2, t2, p);
  CHECK(saturated < 100 * std::log(2.0));
  CHECK(saturated >= 0.0);

  FlatEmbeddings bad = a2;
  bad.labels = {1, 0};
  CHECK_THROWS_AS(asyp_phoneme_loss(bad, t2, p), StructuralError);
}

TEST_CASE("asyp matches a per-anchor loop oracle") {
  std::mt19937_64 rng(12);
  Batch b = random_batch(rng, 6, 4, kSixLabels);
  AsyPParams fixed = AsyPParams::fixed(0.01, 1.5, 0.01);
  CHECK(asyp_phoneme_loss(b.audio, b.text, fixed) ==
        doctest::Approx(loop_oracle(PhonemeLossKind::kAsyP, b, fixed)).epsilon(1e-12));

  AsyPParams adaptive = AsyPParams::adaptive(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int c = 0; c < 3; ++c) {
    adaptive.alpha_raw(c, 0) = u(rng);
    adaptive.beta_raw(c, 0) = u(rng);
    adaptive.lambda(c, 0) = u(rng) / 2;
  }
  CHECK(asyp_phoneme_loss(b.audio, b.text, adaptive) ==
        doctest::Approx(loop_oracle(PhonemeLossKind::kAsyPAdaMS, b, adaptive)).epsilon(1e-12));
}

TEST_CASE("asyp responds to positive and negative similarities") {
  // Rows in 2-D so a single rotation moves exactly one similarity.
  AsyPParams p = AsyPParams::fixed(0.5, 1.5, 0.1);
  auto unit = [](double th) {
    RowVector r(2);
    r << std::cos(th), std::sin(th);
    return r;
  };
  FlatEmbeddings a{Matrix(2, 2), {0, 1}}, t{Matrix(2, 2), {0, 1}};
  t.matrix.row(0) = unit(0.0);
  t.matrix.row(1) = unit(2.0);
  a.matrix.row(1) = unit(2.5);
  a.matrix.row(0) = unit(0.8);
  const double base = asyp_phoneme_loss(a, t, p);
  // Audio row 0 closer to its positive text row 0 and farther from negative text row 1.
  a.matrix.row(0) = unit(0.4);
  const double closer = asyp_phoneme_loss(a, t, p);
  CHECK(closer < base);
  // Audio row 1 closer to the negative text row 0.
  a.matrix.row(0) = unit(0.8);
  a.matrix.row(1) = unit(1.2);
  const double pushed = asyp_phoneme_loss(a, t, p);
  CHECK(pushed > base);
}

TEST_CASE("AdaMS parameters stay positive") {
  AsyPParams p = AsyPParams::adaptive(4);
  for (double raw : {-800.0, -40.0, -1.0, 0.0, 3.0, 900.0}) {
    p.alpha_raw.setConstant(raw);
    p.beta_raw.setConstant(raw);
    CHECK(p.alpha(2) > 0.0);
    CHECK(p.beta(3) > 0.0);
  }
  p.lambda.setConstant(4.0);
  p.lambda(1, 0) = -3.0;
  p.clamp_lambda();
  CHECK(p.lambda_of(0) == 1.0);
  CHECK(p.lambda_of(1) == -1.0);
  AsyPParams f = AsyPParams::fixed(0.01, 1.5, 0.01);
  CHECK(f.alpha(5) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(f.beta(0) == doctest::Approx(1.5).epsilon(1e-12));
  int visited = 0;
  f.visit("asyp", [&](const std::string&, Matrix&) { ++visited; });
  CHECK(visited == 0);
  p.visit("asyp", [&](const std::string&, Matrix&) { ++visited; });
  CHECK(visited == 3);
}

TEST_CASE("baseline phoneme losses match loop oracles") {
  std::mt19937_64 rng(13);
  Batch b = random_batch(rng, 6, 4, kSixLabels);
  AsyPParams p = AsyPParams::fixed(0.01, 1.5, 0.01);
  PhonemeLossOptions opts;
  for (auto kind : {PhonemeLossKind::kProxyMS, PhonemeLossKind::kProxyBD, PhonemeLossKind::kClat}) {
    CAPTURE(std::string(to_string(kind)));
    CHECK(baseline_phoneme_loss(kind, b.audio, b.text, p, opts) ==
          doctest::Approx(loop_oracle(kind, b, p, opts)).epsilon(1e-12));
  }
  CHECK(baseline_phoneme_loss(PhonemeLossKind::kTriplet, b.audio, b.text, p, opts) ==
        doctest::Approx(triplet_oracle(b, opts.triplet_margin)).epsilon(1e-12));
  CHECK(baseline_phoneme_loss(PhonemeLossKind::kAsyP, b.audio, b.text, p, opts) ==
        asyp_phoneme_loss(b.audio, b.text, p));
  CHECK_THROWS_AS(baseline_phoneme_loss(PhonemeLossKind::kNone, b.audio, b.text, p, opts), StructuralError);
}

TEST_CASE("baseline phoneme loss trivial cases") {
  AsyPParams p = AsyPParams::fixed();
  FlatEmbeddings a{Matrix(2, 2), {0, 1}}, t{Matrix(2, 2), {0, 1}};
  t.matrix << 1, 0, -1, 0;
  a.matrix = t.matrix;
  CHECK(baseline_phoneme_loss(PhonemeLossKind::kTriplet, a, t, p) == 0.0);

  FlatEmbeddings one_a{Matrix(1, 3), {4}}, one_t{Matrix(1, 3), {4}};
  one_a.matrix << 0.2, -1, 3;
  one_t.matrix << 1, 1, 0;
  CHECK(baseline_phoneme_loss(PhonemeLossKind::kClat, one_a, one_t, p) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("phoneme loss registry") {
  for (auto kind : {PhonemeLossKind::kNone, PhonemeLossKind::kAsyP, PhonemeLossKind::kAsyPAdaMS,
                    PhonemeLossKind::kProxyMS, PhonemeLossKind::kProxyBD, PhonemeLossKind::kClat,
                    PhonemeLossKind::kTriplet}) {
    CHECK(parse_phoneme_loss(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_phoneme_loss("adams"), StructuralError);
}

TEST_CASE("phoneme losses pass finite-difference gradient checks") {
  std::mt19937_64 rng(14);
  Batch b = random_batch(rng, 6, 4, kSixLabels);
  AsyPParams p = AsyPParams::adaptive(3, 0.5, 1.5, 0.1);
  p.alpha_raw(1, 0) = 0.3;
  p.beta_raw(2, 0) = -0.4;
  p.lambda(0, 0) = -0.2;
  for (auto kind : {PhonemeLossKind::kAsyPAdaMS, PhonemeLossKind::kProxyMS, PhonemeLossKind::kProxyBD,
                    PhonemeLossKind::kClat}) {
    CAPTURE(std::string(to_string(kind)));
    auto via_audio = [&](ad::Graph& g, ad::Var x) {
      return phoneme_loss(kind, x, g.constant(b.text.matrix), b.audio.labels, p);
    };
    auto via_text = [&](ad::Graph& g, ad::Var x) {
      return phoneme_loss(kind, g.constant(b.audio.matrix), x, b.audio.labels, p);
    };
    CHECK(oracle::grad_check(via_audio, b.audio.matrix) < 1e-4);
    CHECK(oracle::grad_check(via_text, b.text.matrix) < 1e-4);
  }
  auto params_loss = [&](ad::Graph& g) {
    return phoneme_loss(PhonemeLossKind::kAsyPAdaMS, g.constant(b.audio.matrix), g.constant(b.text.matrix),
                        b.audio.labels, p);
  };
  CHECK(oracle::param_grad_check(params_loss, p.alpha_raw) < 1e-4);
  CHECK(oracle::param_grad_check(params_loss, p.beta_raw) < 1e-4);
  CHECK(oracle::param_grad_check(params_loss, p.lambda) < 1e-4);

  // Hinge kinks are avoided by a margin that keeps every triplet strictly active or inactive.
  auto triplet = [&](ad::Graph& g, ad::Var x) {
    return phoneme_loss(PhonemeLossKind::kTriplet, x, g.constant(b.text.matrix), b.audio.labels, p);
  };
  CHECK(oracle::grad_check(triplet, b.audio.matrix) < 1e-4);
}

TEST_CASE("triplet hinge excludes self on request") {
  Matrix s(3, 3);
  s << 0.9, 0.5, 0.1, 0.5, 0.8, 0.3, 0.1, 0.3, 0.7;
  const std::vector<int> y = {0, 0, 1};
  ad::Graph g;
  const double with_self = triplet_hinge(g.constant(s), y, 0.2, false).scalar();
  const double without = triplet_hinge(g.constant(s), y, 0.2, true).scalar();
  // Anchors 0, 1 with self: (0,0,2)=0 (0,1,2)=0 (1,0,2)=0 (1,1,2)=0; anchor 2 has no negatives of its own
  // class pair other than 0/1 via positives {2}: (2,2,0)=0 (2,2,1)=0.
  CHECK(with_self == 0.0);
  // Without self: (0,1,2)=max(0,.2+.1-.5)=0, (1,0,2)=max(0,.2+.3-.5)=0.
  CHECK(without == 0.0);
  const double tight = triplet_hinge(g.constant(s), y, 0.5, true).scalar();
  CHECK(tight == doctest::Approx((0.1 + 0.3) / 2).epsilon(1e-14));
}

TEST_CASE("rp distance loss") {
  std::mt19937_64 rng(15);
  Matrix te = oracle::gaussian(4, 3, rng);
  CHECK(rp_distance_loss(te, te) < 1e-15);
  CHECK(rp_distance_loss(Matrix(2.5 * te), te) == doctest::Approx(0.0).epsilon(1e-15));
  Matrix ae = oracle::gaussian(4, 3, rng);
  CHECK(rp_distance_loss(ae, te) == doctest::Approx(rp_distance_oracle(ae, te)).epsilon(1e-12));
  RpOptions small;
  small.huber_delta = 0.1;
  CHECK(rp_distance_loss(ae, te, small) == doctest::Approx(rp_distance_oracle(ae, te, 0.1)).epsilon(1e-12));
  CHECK_THROWS_AS(rp_distance_loss(Matrix(te.topRows(1)), Matrix(te.topRows(1))), DomainError);
}

TEST_CASE("rp angle loss") {
  std::mt19937_64 rng(16);
  Matrix te = oracle::gaussian(5, 3, rng);
  CHECK(rp_angle_loss(te, te) == 0.0);
  Matrix q = random_rotation(3, rng);
  RowVector shift = oracle::gaussian(1, 3, rng).row(0);
  Matrix moved = (3.0 * te * q).rowwise() + shift;
  CHECK(rp_angle_loss(moved, te) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  Matrix ae = oracle::gaussian(4, 3, rng);
  Matrix te4 = te.topRows(4);
  CHECK(rp_angle_loss(ae, te4) == doctest::Approx(rp_angle_oracle(ae, te4)).epsilon(1e-12));
  CHECK_THROWS_AS(rp_angle_loss(Matrix(ae.topRows(2)), Matrix(te4.topRows(2))), DomainError);
}

TEST_CASE("rp proto loss") {
  std::mt19937_64 rng(17);
  Matrix te = oracle::gaussian(3, 4, rng);
  Matrix ae = oracle::gaussian(3, 4, rng);
  const std::vector<int> one = {7, 7, 7};
  CHECK(rp_proto_loss(ae, te, one) == 0.0);

  Matrix tt(4, 2), aa(4, 2);
  tt << 1, 0, 1, 0, 0, 1, 0, 1;
  aa = tt;
  const std::vector<int> two = {3, 3, 9, 9};
  const double e = std::exp(10.0);
  CHECK(rp_proto_loss(aa, tt, two) == doctest::Approx(-std::log(e / (e + 1.0))).epsilon(1e-12));

  Matrix ar = oracle::gaussian(6, 4, rng), tr = oracle::gaussian(6, 4, rng);
  const std::vector<int> ids = {5, 2, 5, 8, 2, 5};
  CHECK(rp_proto_loss(ar, tr, ids) == doctest::Approx(rp_proto_oracle(ar, tr, ids)).epsilon(1e-12));
  CHECK_THROWS_AS(rp_proto_loss(Matrix(0, 4), Matrix(0, 4), {}), StructuralError);
}

TEST_CASE("utterance rp composition") {
  std::mt19937_64 rng(18);
  Matrix te = oracle::gaussian(4, 3, rng);
  const std::vector<int> single = {1, 1, 1, 1};
  CHECK(utterance_rp_loss(te, te, single, {}) < 1e-15);

  Matrix ae = oracle::gaussian(4, 3, rng);
  const std::vector<int> ids = {0, 1, 0, 1};
  CHECK(utterance_rp_loss(ae, te, ids, {1, 0, 0}) == rp_distance_loss(ae, te));
  const double expected = rp_distance_oracle(ae, te) + rp_angle_oracle(ae, te) + rp_proto_oracle(ae, te, ids);
  CHECK(utterance_rp_loss(ae, te, ids, {1, 1, 1}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(utterance_rp_loss(ae, te, ids, {-1, 0, 0}), DomainError);
}

TEST_CASE("rp losses pass gradient checks and block the text side") {
  std::mt19937_64 rng(19);
  Matrix ae = oracle::gaussian(5, 3, rng);
  Matrix te = oracle::gaussian(5, 3, rng);
  const std::vector<int> ids = {0, 1, 0, 2, 1};
  RpOptions opts;
  opts.huber_delta = 0.3;  // exercises both Huber branches
  auto f = [&](ad::Graph& g, ad::Var x) {
    return utterance_rp_loss(x, g.constant(te), ids, {1, 1, 1}, opts);
  };
  CHECK(oracle::grad_check(f, ae) < 1e-4);

  ad::Graph g;
  ad::Var a = g.variable(ae);
  ad::Var t = g.variable(te);
  g.backward(utterance_rp_loss(a, t, ids, {1, 1, 1}, opts));
  CHECK(g.grad(t).norm() == 0.0);
  CHECK(g.grad(a).norm() > 0.0);
}
