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

#ifndef ADML_TESTS_ORACLES_HPP_
#define ADML_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "adml/autodiff/graph.hpp"
#include "adml/core/types.hpp"

namespace oracle {

using adml::Matrix;

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline double cosine(const double* a, const double* b, Eigen::Index d) {
  long double dot = 0, na = 0, nb = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    dot += static_cast<long double>(a[k]) * b[k];
    na += static_cast<long double>(a[k]) * a[k];
    nb += static_cast<long double>(b[k]) * b[k];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

inline double cos_rows(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return cosine(a.row(i).data(), b.row(j).data(), a.cols());
}

inline double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }

// Relative error between two gradients, robust when both are tiny.
inline double rel_err(const Matrix& a, const Matrix& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / denom;
}

// f builds a scalar on a fresh graph from x; returns the relative error of reverse mode vs central differences.
inline double grad_check(const std::function<adml::ad::Var(adml::ad::Graph&, adml::ad::Var)>& f, const Matrix& x,
                         double h = 1e-6) {
  Matrix analytic;
  {
    adml::ad::Graph g;
    adml::ad::Var xv = g.variable(x);
    adml::ad::Var y = f(g, xv);
    g.backward(y);
    analytic = g.grad(xv);
  }
  Matrix numeric(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    adml::ad::Graph gp, gm;
    const double fp = f(gp, gp.constant(xp)).scalar();
    const double fm = f(gm, gm.constant(xm)).scalar();
    numeric.data()[i] = (fp - fm) / (2 * h);
  }
  return rel_err(analytic, numeric);
}

// Same check for a parameter matrix read through Graph::param.
inline double param_grad_check(const std::function<adml::ad::Var(adml::ad::Graph&)>& f, Matrix& p, double h = 1e-6) {
  Matrix analytic;
  {
    adml::ad::Graph g;
    adml::ad::Var y = f(g);
    g.backward(y);
    analytic = g.has_param_grad(p) ? g.param_grad(p) : Matrix::Zero(p.rows(), p.cols());
  }
  Matrix numeric(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double orig = p.data()[i];
    p.data()[i] = orig + h;
    double fp, fm;
    {
      adml::ad::Graph g;
      fp = f(g).scalar();
    }
    p.data()[i] = orig - h;
    {
      adml::ad::Graph g;
      fm = f(g).scalar();
    }
    p.data()[i] = orig;
    numeric.data()[i] = (fp - fm) / (2 * h);
  }
  return rel_err(analytic, numeric);
}

// ---- metrics ---------------------------------------------------------------

inline double ap(const std::vector<double>& s, const std::vector<bool>& y) {
  // Precision at each positive: positives strictly above, plus everything tied at or above it, with tied
  // negatives ranked first and tied positives in index order.
  const std::size_t n = s.size();
  std::vector<std::pair<std::size_t, double>> precisions;
  for (std::size_t i = 0; i < n; ++i) {
    if (!y[i]) continue;
    std::size_t rank = 1;
    std::size_t hits = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool before = s[j] > s[i] || (s[j] == s[i] && (!y[j] || j < i));
      if (before) {
        ++rank;
        if (y[j]) ++hits;
      }
    }
    precisions.emplace_back(rank, static_cast<double>(hits) / static_cast<double>(rank));
  }
  std::sort(precisions.begin(), precisions.end());
  double total = 0;
  for (const auto& pr : precisions) total += pr.second;
  return total / static_cast<double>(precisions.size());
}

inline double auc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

struct Op {
  double far;
  double frr;
};

// Operating points of every threshold "accept iff score >= t", t over the scores plus +inf.
inline std::vector<Op> operating_points(const std::vector<double>& s, const std::vector<bool>& y) {
  std::vector<double> th(s.begin(), s.end());
  th.push_back(std::numeric_limits<double>::infinity());
  double np = 0, nn = 0;
  for (bool l : y) (l ? np : nn) += 1;
  std::vector<Op> out;
  for (double t : th) {
    double fa = 0, fr = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (y[i] && s[i] < t) fr += 1;
      if (!y[i] && s[i] >= t) fa += 1;
    }
    out.push_back({fa / nn, fr / np});
  }
  return out;
}

// Lowest diagonal crossing over every pair of operating points that straddles FAR = FRR.
inline double eer(const std::vector<double>& s, const std::vector<bool>& y) {
  const auto pts = operating_points(s, y);
  double best = std::numeric_limits<double>::infinity();
  for (const Op& p : pts) {
    for (const Op& q : pts) {
      const double dp = p.far - p.frr;
      const double dq = q.far - q.frr;
      if (!(dp <= 0 && dq >= 0)) continue;
      double v;
      if (dp == dq) {
        v = p.far;
      } else {
        const double t = dp / (dp - dq);
        v = p.far + t * (q.far - p.far);
      }
      best = std::min(best, v);
    }
  }
  return best;
}

}  // namespace oracle

#endif  // ADML_TESTS_ORACLES_HPP_
