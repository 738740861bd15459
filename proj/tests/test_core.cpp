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
#include <random>

#include "adml/autodiff/ops.hpp"
#include "adml/core/batch.hpp"
#include "adml/core/rng.hpp"
#include "oracles.hpp"

using namespace adml;

TEST_CASE("ragged_flatten shapes and order") {
  RaggedEmbeddings e;
  e.values = {Matrix::Constant(2, 4, 1.0), Matrix::Constant(3, 4, 2.0)};
  FlatEmbeddings f = ragged_flatten(e, {{1, 2}, {3, 4, 5}});
  CHECK(f.rows() == 5);
  CHECK(f.matrix.cols() == 4);
  CHECK(f.labels.size() == 5);

  RaggedEmbeddings one;
  one.values = {Matrix::Constant(1, 3, 7.0)};
  FlatEmbeddings g = ragged_flatten(one, {{9}});
  CHECK(g.matrix == one.values[0]);
  CHECK(g.labels == std::vector<int>{9});

  RaggedEmbeddings three;
  three.values = {Matrix::Zero(3, 2), Matrix::Zero(1, 2), Matrix::Zero(2, 2)};
  const std::vector<std::vector<int>> labels{{5, 5, 7}, {2}, {9, 9}};
  FlatEmbeddings h = ragged_flatten(three, labels);
  std::vector<int> walk;
  for (const auto& seq : labels) {
    for (int id : seq) walk.push_back(id);
  }
  CHECK(h.labels == walk);
}

TEST_CASE("ragged_flatten rejects length mismatch") {
  RaggedEmbeddings e;
  e.values = {Matrix::Zero(2, 4)};
  CHECK_THROWS_AS(ragged_flatten(e, {{1, 2, 3}}), StructuralError);
  CHECK_THROWS_AS(ragged_flatten(e, {{1}, {2}}), StructuralError);
}

TEST_CASE("flatten then unflatten reconstructs bit-exactly") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    RaggedEmbeddings e;
    std::vector<std::vector<int>> labels;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      const int t = 1 + static_cast<int>(rng() % 6);
      e.values.push_back(oracle::gaussian(t, 3, rng));
      labels.push_back(std::vector<int>(static_cast<std::size_t>(t), i));
    }
    FlatEmbeddings f = ragged_flatten(e, labels);
    RaggedEmbeddings back = ragged_unflatten(f, e.lengths());
    REQUIRE(back.size() == e.size());
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(back.values[i] == e.values[i]);
  }
}

TEST_CASE("cosine_sim analytic cases") {
  RowVector u(3), v(3);
  u << 1, 2, 3;
  CHECK(cosine_sim(u, u) == doctest::Approx(1.0).epsilon(1e-15));
  RowVector a(2), b(2), c(2);
  a << 1, 0;
  b << 0, 1;
  c << 1, 1;
  CHECK(cosine_sim(a, b) == 0.0);
  CHECK(cosine_sim(a, c) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(cosine_sim(a, RowVector::Zero(2)), DomainError);
}

TEST_CASE("cosine_sim is symmetric and scale invariant") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    RowVector u = oracle::gaussian(1, 6, rng).row(0);
    RowVector v = oracle::gaussian(1, 6, rng).row(0);
    const double c = 0.01 + std::abs(oracle::gaussian(1, 1, rng)(0, 0)) * 10;
    CHECK(cosine_sim(u, v) == doctest::Approx(cosine_sim(v, u)).epsilon(1e-14));
    CHECK(cosine_sim(RowVector(c * u), v) == doctest::Approx(cosine_sim(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("pairwise_cosine matches the scalar op") {
  Matrix one(1, 3);
  one << 0.6, 0.8, 0.0;
  CHECK(pairwise_cosine(one, one)(0, 0) == doctest::Approx(1.0));
  Matrix eye = Matrix::Identity(3, 3);
  CHECK(pairwise_cosine(eye, eye).isApprox(eye));

  std::mt19937_64 rng(11);
  Matrix a = oracle::gaussian(3, 4, rng);
  Matrix b = oracle::gaussian(2, 4, rng);
  Matrix p = pairwise_cosine(a, b);
  Matrix q = pairwise_cosine(b, a);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double s = cosine_sim(a.row(i), b.row(j));
      CHECK(std::abs(p(i, j) - s) <= 1e-12 * std::max(1.0, std::abs(s)));
      CHECK(q(j, i) == doctest::Approx(p(i, j)).epsilon(1e-14));
    }
  }
  a.row(1).setZero();
  CHECK_THROWS_WITH_AS(pairwise_cosine(a, b), doctest::Contains("row 1"), DomainError);
}

TEST_CASE("named substreams are deterministic and distinct") {
  Rng a = substream(42, "data");
  Rng b = substream(42, "data");
  Rng c = substream(42, "init");
  Rng d = substream(43, "data");
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

namespace {

using ad::Graph;
using ad::Var;

void check_unary(const char* name, const std::function<Var(Var)>& op, const Matrix& x) {
  const std::string op_name = name;
  CAPTURE(op_name);
  const double err = oracle::grad_check(
      [&](Graph& g, Var v) {
        Var y = op(v);
        Matrix w(y.rows(), y.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = std::sin(1.0 + 0.7 * static_cast<double>(i));
        return ad::add(ad::sum_all(ad::mul(y, g.constant(w))), ad::scale(ad::sum_all(ad::square(y)), 0.5));
      },
      x);
  CHECK(err < 1e-6);
}

}  // namespace

TEST_CASE("elementwise op gradients") {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::gaussian(3, 4, rng);
  const Matrix pos = x.cwiseAbs().array() + 0.5;
  check_unary("tanh", [](Var v) { return ad::tanh(v); }, x);
  check_unary("sigmoid", [](Var v) { return ad::sigmoid(v); }, x);
  check_unary("softplus", [](Var v) { return ad::softplus(v); }, x);
  check_unary("exp", [](Var v) { return ad::exp(ad::scale(v, 0.3)); }, x);
  check_unary("log", [](Var v) { return ad::log(v); }, pos);
  check_unary("reciprocal", [](Var v) { return ad::reciprocal(v); }, pos);
  check_unary("sqrt_floor", [](Var v) { return ad::sqrt_floor(v, 1e-10); }, pos);
  check_unary("pow", [](Var v) { return ad::pow(v, 2.5); }, pos);
  check_unary("square", [](Var v) { return ad::square(v); }, x);
  check_unary("huber", [](Var v) { return ad::huber(v, 0.7); }, x);
  check_unary("row_softmax", [](Var v) { return ad::row_softmax(v); }, x);
  check_unary("col_softmax", [](Var v) { return ad::col_softmax(v); }, x);
  check_unary("log_softmax_rows", [](Var v) { return ad::log_softmax_rows(v); }, x);
  check_unary("logsumexp_rows", [](Var v) { return ad::logsumexp_rows(v); }, x);
  check_unary("row_normalize", [](Var v) { return ad::row_normalize(v); }, x);
  check_unary("transpose", [](Var v) { return ad::transpose(v); }, x);
  check_unary("mean_over_rows", [](Var v) { return ad::mean_over_rows(v); }, x);
  check_unary("sum_over_cols", [](Var v) { return ad::sum_over_cols(v); }, x);
  check_unary("unfold_time", [](Var v) { return ad::unfold_time(v, 3); }, x);
  check_unary("pairwise_distances", [](Var v) { return ad::pairwise_distances(v); }, x);
  check_unary("pairwise_cosine", [](Var v) { return ad::pairwise_cosine(v, v); }, x);
  check_unary("matmul_nt", [](Var v) { return ad::matmul_nt(v, v); }, x);
  check_unary("gather_rows", [](Var v) { return ad::gather_rows(v, std::vector<int>{2, 0, 2}); }, x);
  check_unary("slice_rows", [](Var v) { return ad::slice_rows(v, 1, 2); }, x);
  Matrix mask = Matrix::Zero(3, 4);
  mask(0, 1) = mask(1, 3) = mask(2, 0) = 1;
  check_unary("log1p_sum_exp_rows", [&](Var v) { return ad::log1p_sum_exp_rows(v, mask); }, x);
  Matrix cosines = (x.array() * 0.3).tanh();
  check_unary("angular_margin", [&](Var v) { return ad::angular_margin(v, mask, 0.2); }, cosines);
}

TEST_CASE("binary op gradients") {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::gaussian(3, 4, rng);
  const Matrix b = oracle::gaussian(4, 2, rng);
  const Matrix row = oracle::gaussian(1, 4, rng);
  const Matrix col = oracle::gaussian(3, 1, rng);
  CHECK(oracle::grad_check([&](Graph& g, Var v) { return ad::sum_all(ad::square(ad::matmul(v, g.constant(b)))); }, a) <
        1e-6);
  CHECK(oracle::grad_check([&](Graph& g, Var v) { return ad::sum_all(ad::square(ad::matmul(g.constant(a), v))); }, b) <
        1e-6);
  CHECK(oracle::grad_check([&](Graph& g, Var v) { return ad::sum_all(ad::square(ad::mul_row(g.constant(a), v))); },
                           row) < 1e-6);
  CHECK(oracle::grad_check([&](Graph& g, Var v) { return ad::sum_all(ad::square(ad::mul_col(g.constant(a), v))); },
                           col) < 1e-6);
  CHECK(oracle::grad_check([&](Graph& g, Var v) { return ad::sum_all(ad::square(ad::add_row(g.constant(a), v))); },
                           row) < 1e-6);
  CHECK(oracle::grad_check(
            [&](Graph& g, Var v) {
              return ad::sum_all(ad::square(ad::concat_cols({g.constant(a), ad::repeat_rows(v, 3)})));
            },
            row) < 1e-6);
  CHECK(oracle::grad_check(
            [&](Graph& g, Var v) { return ad::sum_all(ad::scale_by(g.constant(a), ad::sum_all(ad::square(v)))); },
            row) < 1e-6);
}

TEST_CASE("backward requires a scalar and reaches only recorded inputs") {
  Graph g;
  Var x = g.variable(Matrix::Ones(2, 2));
  CHECK_THROWS(g.backward(x));
  Var y = g.variable(Matrix::Ones(2, 2));
  g.backward(ad::sum_all(x));
  CHECK(g.grad(x) == Matrix::Ones(2, 2));
  CHECK(g.grad(y) == Matrix::Zero(2, 2));
}

TEST_CASE("param leaves accumulate across uses") {
  Matrix w = Matrix::Constant(1, 1, 3.0);
  Graph g;
  Var a = g.param(w);
  Var b = g.param(w);
  g.backward(ad::sum_all(ad::mul(a, b)));
  CHECK(g.param_grad(w)(0, 0) == doctest::Approx(6.0));
}
