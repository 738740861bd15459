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

#include <random>

#include "adml/autodiff/ops.hpp"
#include "adml/encoders/encoders.hpp"
#include "oracles.hpp"

using namespace adml;

namespace {

EncoderConfig small_config() {
  EncoderConfig c;
  c.feature_dim = 5;
  c.embed_dim = 8;
  c.conv_channels = 6;
  c.vocab_size = 12;
  c.rnn_units = 4;
  c.ccsp_hidden = 4;
  return c;
}

}  // namespace

TEST_CASE("acoustic encoder preserves length and embeds to d") {
  Rng rng = substream(1, "test");
  EncoderConfig cfg;
  AcousticEncoder enc(cfg, rng);
  std::mt19937_64 r(4);
  CHECK(enc.encode(oracle::gaussian(7, 40, r)).rows() == 7);
  CHECK(enc.encode(oracle::gaussian(7, 40, r)).cols() == 256);
  CHECK(enc.encode(oracle::gaussian(1, 40, r)).rows() == 1);
  const Matrix x = oracle::gaussian(9, 40, r);
  CHECK(enc.encode(x) == enc.encode(x));
  CHECK_THROWS_AS(enc.encode(oracle::gaussian(4, 39, r)), StructuralError);
}

TEST_CASE("text encoder shapes, range checks and context") {
  Rng rng = substream(2, "test");
  EncoderConfig cfg;
  TextEncoder enc(cfg, rng);
  const std::vector<int> ids{3, 9, 1};
  CHECK(enc.encode(ids).rows() == 3);
  CHECK(enc.encode(ids).cols() == 256);
  CHECK(enc.encode(std::vector<int>{0}).rows() == 1);
  CHECK_THROWS_WITH_AS(enc.encode(std::vector<int>{1, 40}), doctest::Contains("40"), DomainError);
  CHECK_THROWS_AS(enc.encode(std::vector<int>{-1}), DomainError);
  const Matrix fwd = enc.encode(ids);
  const Matrix rev = enc.encode(std::vector<int>{1, 9, 3});
  CHECK_FALSE(fwd.row(0).isApprox(rev.row(2)));
}

TEST_CASE("text encoder without recurrence is a per-position map") {
  Rng rng = substream(3, "test");
  EncoderConfig cfg = small_config();
  TextEncoder enc(cfg, rng);
  enc.fwd_recurrent.setZero();
  enc.bwd_recurrent.setZero();
  const Matrix out = enc.encode(std::vector<int>{3, 9, 3});
  CHECK(out.row(0) == out.row(2));
  CHECK(out.row(1) == enc.encode(std::vector<int>{9}).row(0));
  CHECK(out.row(0) == enc.encode(std::vector<int>{3}).row(0));
}

TEST_CASE("gap_pool analytic cases") {
  Matrix one(1, 3);
  one << 1, 2, 3;
  CHECK(gap_pool(one) == one.row(0));
  Matrix pm(2, 2);
  pm << 1, -2, -1, 2;
  CHECK(gap_pool(pm).isZero());
  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  RowVector expect(2);
  expect << 3, 4;
  CHECK(gap_pool(m).isApprox(expect));
  CHECK_THROWS_AS(gap_pool(Matrix(0, 2)), StructuralError);
}

TEST_CASE("weighted statistics of a constant sequence") {
  ad::Graph g;
  RowVector v(4);
  v << 0.5, -1, 2, 3;
  Matrix seq = v.replicate(5, 1);
  std::mt19937_64 r(5);
  WeightedStats s = weighted_statistics(g.constant(seq), g.constant(oracle::gaussian(5, 4, r)), 1e-10);
  CHECK(s.mean.value().isApprox(Matrix(v)));
  CHECK(s.stddev.value().maxCoeff() <= 1e-5);

  ad::Graph g1;
  Matrix single(1, 4);
  single << 1, 2, 3, 4;
  WeightedStats s1 = weighted_statistics(g1.constant(single), g1.constant(oracle::gaussian(1, 4, r)), 1e-10);
  CHECK(s1.weights.value() == Matrix::Ones(1, 4));
  CHECK(s1.mean.value() == single);
  CHECK(s1.stddev.value().maxCoeff() <= 1e-5);
}

TEST_CASE("weighted statistics match a scalar loop") {
  std::mt19937_64 r(6);
  const Matrix seq = oracle::gaussian(4, 8, r);
  const Matrix logits = oracle::gaussian(4, 8, r);
  ad::Graph g;
  WeightedStats s = weighted_statistics(g.constant(seq), g.constant(logits), 1e-10);
  for (int c = 0; c < 8; ++c) {
    double z = 0;
    for (int t = 0; t < 4; ++t) z += std::exp(logits(t, c));
    double mu = 0, m2 = 0, wsum = 0;
    for (int t = 0; t < 4; ++t) {
      const double w = std::exp(logits(t, c)) / z;
      wsum += w;
      mu += w * seq(t, c);
      m2 += w * seq(t, c) * seq(t, c);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.mean.value()(0, c) == doctest::Approx(mu).epsilon(1e-12));
    CHECK(s.stddev.value()(0, c) == doctest::Approx(std::sqrt(std::max(m2 - mu * mu, 1e-10))).epsilon(1e-10));
  }
}

TEST_CASE("CCSP attention columns sum to one and sigma is nonnegative") {
  Rng rng = substream(4, "test");
  EncoderConfig cfg = small_config();
  CcspPooling pool(cfg, rng);
  std::mt19937_64 r(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int t = 1 + static_cast<int>(r() % 9);
    ad::Graph g;
    ad::Var seq = g.constant(oracle::gaussian(t, 8, r, 2.0));
    WeightedStats s = weighted_statistics(seq, pool.attention_logits(g, seq), cfg.ccsp_eps);
    const Matrix sums = s.weights.value().colwise().sum();
    CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-6);
    CHECK(s.stddev.value().minCoeff() >= 0.0);
    CHECK(pool.pool(seq.value()).size() == 8);
  }
  CHECK_THROWS_AS(pool.pool(Matrix(0, 8)), StructuralError);
}

TEST_CASE("pooling gradients match finite differences") {
  Rng rng = substream(5, "test");
  EncoderConfig cfg = small_config();
  CcspPooling pool(cfg, rng);
  std::mt19937_64 r(8);
  const Matrix w = oracle::gaussian(1, 8, r);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = oracle::gaussian(5, 8, r);
    auto ccsp = [&](ad::Graph& g, ad::Var v) { return ad::sum_all(ad::mul(pool.forward(g, v), g.constant(w))); };
    CHECK(oracle::grad_check(ccsp, x) < 1e-4);
    auto gap = [&](ad::Graph& g, ad::Var v) { return ad::sum_all(ad::mul(gap_pool(v), g.constant(w))); };
    CHECK(oracle::grad_check(gap, x) < 1e-4);
    for (Matrix* p : {&pool.attention_hidden.weight, &pool.attention_hidden.bias, &pool.attention_out.weight,
                      &pool.projection.weight}) {
      CHECK(oracle::param_grad_check(
                [&](ad::Graph& g) { return ad::sum_all(ad::mul(pool.forward(g, g.constant(x)), g.constant(w))); },
                *p) < 1e-4);
    }
  }
  // A per-channel logit offset is constant over time, so the softmax ignores it.
  ad::Graph g;
  g.backward(ad::sum_all(ad::mul(pool.forward(g, g.constant(oracle::gaussian(5, 8, r))), g.constant(w))));
  CHECK(g.param_grad(pool.attention_out.bias).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("encoder parameter gradients match finite differences") {
  Rng rng = substream(6, "test");
  EncoderConfig cfg = small_config();
  AcousticEncoder ac(cfg, rng);
  TextEncoder tx(cfg, rng);
  std::mt19937_64 r(9);
  const Matrix x = oracle::gaussian(4, 5, r);
  const Matrix w = oracle::gaussian(4, 8, r);
  const std::vector<int> ids{1, 5, 7, 2};
  auto a_loss = [&](ad::Graph& g) { return ad::sum_all(ad::mul(ac.forward(g, g.constant(x)), g.constant(w))); };
  auto t_loss = [&](ad::Graph& g) { return ad::sum_all(ad::mul(tx.forward(g, ids), g.constant(w))); };
  CHECK(oracle::param_grad_check(a_loss, ac.convs[0].weight) < 1e-4);
  CHECK(oracle::param_grad_check(a_loss, ac.convs[1].bias) < 1e-4);
  CHECK(oracle::param_grad_check(a_loss, ac.projection.weight) < 1e-4);
  CHECK(oracle::param_grad_check(t_loss, tx.table) < 1e-4);
  CHECK(oracle::param_grad_check(t_loss, tx.fwd_recurrent) < 1e-4);
  CHECK(oracle::param_grad_check(t_loss, tx.bwd_input.weight) < 1e-4);
  CHECK(oracle::grad_check([&](ad::Graph& g, ad::Var v) { return ad::sum_all(ad::mul(ac.forward(g, v), g.constant(w))); },
                           x) < 1e-4);
}

TEST_CASE("parameter names follow the hierarchical scheme") {
  Rng rng = substream(7, "test");
  EncoderConfig cfg = small_config();
  AcousticEncoder ac(cfg, rng);
  std::vector<std::string> names;
  ac.visit("acoustic", [&](const std::string& n, Matrix&) { names.push_back(n); });
  CHECK(names.front() == "acoustic/conv0/kernel");
}
