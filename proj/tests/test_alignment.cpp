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
#include <numeric>
#include <random>

#include "adml/alignment/cross_attention.hpp"
#include "adml/autodiff/ops.hpp"
#include "oracles.hpp"

using namespace adml;

TEST_CASE("cross_attend singleton and identical frames") {
  Matrix t(1, 3), a(1, 3);
  t << 1, 2, 3;
  a << -1, 0.5, 2;
  AffinityResult r = cross_attend(t, a);
  CHECK(r.affinity(0, 0) == 1.0);
  CHECK(r.aggregated == a);

  std::mt19937_64 rng(1);
  Matrix text = oracle::gaussian(3, 4, rng);
  RowVector frame = oracle::gaussian(1, 4, rng).row(0);
  Matrix audio = frame.replicate(5, 1);
  AffinityResult u = cross_attend(text, audio);
  CHECK((u.affinity.array() - 0.2).abs().maxCoeff() < 1e-15);
  for (int i = 0; i < 3; ++i) CHECK(u.aggregated.row(i).isApprox(frame));
}

TEST_CASE("cross_attend two-key example") {
  Matrix q(1, 2), k(2, 2);
  q << 1, 0;
  k << 1, 0, 0, 1;
  AffinityResult r = cross_attend(q, k);
  const double e = std::exp(1.0 / std::sqrt(2.0));
  CHECK(r.affinity(0, 0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-14));
  CHECK(r.affinity(0, 0) == doctest::Approx(0.6698).epsilon(1e-4));
  CHECK(r.affinity(0, 1) == doctest::Approx(0.3302).epsilon(1e-4));
}

TEST_CASE("monotonic matching loss gating and identity") {
  std::mt19937_64 rng(2);
  Matrix anything = oracle::gaussian(3, 5, rng);
  CHECK(monotonic_matching_loss(anything, false) == 0.0);
  for (int n : {1, 2, 5, 9}) {
    Matrix g = monotonic_target(n, n, 0.1);
    CHECK(monotonic_matching_loss(g, true) == 0.0);
  }
  Matrix bad = Matrix::Constant(2, 4, 0.3);
  CHECK_THROWS_AS(monotonic_matching_loss(bad, true), ContractViolation);
}

TEST_CASE("monotonic matching loss on a uniform affinity") {
  const int tt = 2, ta = 4;
  const double sigma = 0.1 * ta;
  Matrix g(tt, ta);
  for (int i = 0; i < tt; ++i) {
    const double centre = i * (ta - 1.0) / std::max(tt - 1, 1);
    double z = 0;
    for (int j = 0; j < ta; ++j) z += std::exp(-(j - centre) * (j - centre) / (2 * sigma * sigma));
    for (int j = 0; j < ta; ++j) g(i, j) = std::exp(-(j - centre) * (j - centre) / (2 * sigma * sigma)) / z;
  }
  double mse = 0;
  for (int i = 0; i < tt; ++i) {
    for (int j = 0; j < ta; ++j) mse += (0.25 - g(i, j)) * (0.25 - g(i, j));
  }
  mse /= tt * ta;
  CHECK(monotonic_matching_loss(Matrix::Constant(tt, ta, 0.25), true) == doctest::Approx(mse).epsilon(1e-12));
  CHECK(monotonic_target(tt, ta, 0.1).isApprox(g, 1e-12));
}

TEST_CASE("affinity rows are stochastic and attention is permutation equivariant") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int tt = 1 + static_cast<int>(rng() % 6);
    const int ta = tt + static_cast<int>(rng() % 6);
    const Matrix t = oracle::gaussian(tt, 5, rng, 3.0);
    const Matrix a = oracle::gaussian(ta, 5, rng, 3.0);
    AffinityResult r = cross_attend(t, a);
    CHECK((r.affinity.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
    CHECK(r.affinity.minCoeff() >= 0.0);
    std::vector<int> perm(static_cast<std::size_t>(ta));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix ap(ta, 5);
    for (int j = 0; j < ta; ++j) ap.row(j) = a.row(perm[static_cast<std::size_t>(j)]);
    AffinityResult rp = cross_attend(t, ap);
    for (int j = 0; j < ta; ++j) {
      CHECK((rp.affinity.col(j) - r.affinity.col(perm[static_cast<std::size_t>(j)])).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(rp.aggregated.isApprox(r.aggregated, 1e-12));
  }
}

TEST_CASE("cross attention and matching loss gradients") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix t = oracle::gaussian(3, 2, rng);
    const Matrix a = oracle::gaussian(4, 2, rng);
    const Matrix w = oracle::gaussian(3, 2, rng);
    auto wrt_text = [&](ad::Graph& g, ad::Var v) {
      AttentionVars r = cross_attend(v, g.constant(a));
      return ad::add(ad::sum_all(ad::mul(r.aggregated, g.constant(w))), monotonic_matching_loss(r.affinity, true, 0.1));
    };
    auto wrt_audio = [&](ad::Graph& g, ad::Var v) {
      AttentionVars r = cross_attend(g.constant(t), v);
      return ad::add(ad::sum_all(ad::mul(r.aggregated, g.constant(w))), monotonic_matching_loss(r.affinity, true, 0.1));
    };
    CHECK(oracle::grad_check(wrt_text, t) < 1e-4);
    CHECK(oracle::grad_check(wrt_audio, a) < 1e-4);
  }
}
