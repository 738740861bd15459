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

#ifndef ADML_CORE_PARAMS_HPP_
#define ADML_CORE_PARAMS_HPP_

#include <functional>
#include <string>

#include "adml/autodiff/graph.hpp"
#include "adml/core/rng.hpp"
#include "adml/core/types.hpp"

namespace adml {

// Every trainable matrix belongs to exactly one optimisation group.
enum class ParamGroup { kEmbedding, kModality };

using ParamVisitor = std::function<void(const std::string& name, Matrix& value)>;

// U(-sqrt(3 / fan_in), sqrt(3 / fan_in)).
Matrix uniform_fan_in(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng);

// y = x W + b, W in_dim x out_dim, b 1 x out_dim.
struct Linear {
  Matrix weight;
  Matrix bias;

  Linear() = default;
  Linear(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng);

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }

  ad::Var forward(ad::Graph& g, ad::Var x) const;
  void visit(const std::string& prefix, const ParamVisitor& f);
};

}  // namespace adml

#endif  // ADML_CORE_PARAMS_HPP_
