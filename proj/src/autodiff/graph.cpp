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

#include "adml/autodiff/graph.hpp"

namespace adml::ad {

Var Graph::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, {}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::scalar_constant(double v) { return constant(Matrix::Constant(1, 1, v)); }

Var Graph::param(const Matrix& p) {
  if (auto it = params_.find(&p); it != params_.end()) return Var{this, it->second};
  Var v = variable(p);
  params_.emplace(&p, v.id);
  return v;
}

Var Graph::record(Matrix value, std::initializer_list<Var> parents, BackwardFn fn) {
  bool needs = false;
  for (Var p : parents) needs = needs || requires_grad(p);
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(fn) : BackwardFn{}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::record(Matrix value, const std::vector<Var>& parents, BackwardFn fn) {
  bool needs = false;
  for (Var p : parents) needs = needs || requires_grad(p);
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(fn) : BackwardFn{}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Matrix Graph::grad(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Graph::has_param_grad(const Matrix& p) const {
  auto it = params_.find(&p);
  return it != params_.end() && nodes_[static_cast<std::size_t>(it->second)].has_grad;
}

Matrix Graph::param_grad(const Matrix& p) const {
  auto it = params_.find(&p);
  if (it == params_.end()) return Matrix::Zero(p.rows(), p.cols());
  return grad(Var{const_cast<Graph*>(this), it->second});
}

void Graph::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (!n.requires_grad) return;
  if (g.rows() != n.value.rows() || g.cols() != n.value.cols()) {
    throw StructuralError("autodiff: gradient shape mismatch");
  }
  if (n.has_grad) {
    n.grad += g;
  } else {
    n.grad = g;
    n.has_grad = true;
  }
}

void Graph::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1) throw StructuralError("autodiff: backward target must be 1x1");
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(loss, Matrix::Ones(1, 1));
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.has_grad && n.backward) n.backward(*this, n.grad);
  }
}

}  // namespace adml::ad
