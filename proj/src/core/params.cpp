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

#include "adml/core/params.hpp"

#include <cmath>

#include "adml/autodiff/ops.hpp"

namespace adml {

Matrix uniform_fan_in(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

Linear::Linear(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng)
    : weight(uniform_fan_in(in_dim, out_dim, in_dim, rng)), bias(Matrix::Zero(1, out_dim)) {}

ad::Var Linear::forward(ad::Graph& g, ad::Var x) const {
  return ad::add_row(ad::matmul(x, g.param(weight)), g.param(bias));
}

void Linear::visit(const std::string& prefix, const ParamVisitor& f) {
  f(prefix + "/kernel", weight);
  f(prefix + "/bias", bias);
}

}  // namespace adml
