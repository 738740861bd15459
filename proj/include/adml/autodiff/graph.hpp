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

#ifndef ADML_AUTODIFF_GRAPH_HPP_
#define ADML_AUTODIFF_GRAPH_HPP_

#include <deque>
#include <functional>
#include <initializer_list>
#include <unordered_map>
#include <vector>

#include "adml/core/types.hpp"

namespace adml::ad {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

// Reverse-mode tape over dense matrices. Nodes are appended in evaluation order,
// so reverse creation order is a valid topological order for backpropagation.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Matrix& grad_out)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  Var scalar_constant(double v);

  // Binds an externally owned parameter. Binding the same matrix twice returns the same node,
  // so gradients from every use accumulate into one leaf.
  Var param(const Matrix& p);

  // Records an op output. `fn` is dropped when no parent requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(Matrix value, const std::vector<Var>& parents, BackwardFn fn);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }

  // Gradient of the last backward() target w.r.t. v; zeros when v was not reached.
  Matrix grad(Var v) const;
  // Gradient w.r.t. a bound parameter, or an empty optional-like flag via has_grad().
  bool has_param_grad(const Matrix& p) const;
  Matrix param_grad(const Matrix& p) const;

  void backward(Var loss);

  // Used by op implementations during backward.
  void accumulate(Var v, const Matrix& g);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;  // stable element addresses
  std::unordered_map<const Matrix*, int> params_;
};

inline const Matrix& Var::value() const { return graph->value(*this); }

}  // namespace adml::ad

#endif  // ADML_AUTODIFF_GRAPH_HPP_
