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

#ifndef ADML_AUTODIFF_OPS_HPP_
#define ADML_AUTODIFF_OPS_HPP_

#include <span>
#include <vector>

#include "adml/autodiff/graph.hpp"

namespace adml::ad {

// Elementwise arithmetic (equal shapes).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
// a * s where s is 1x1.
Var scale_by(Var a, Var s);

// Broadcasting: row is 1 x cols, col is rows x 1.
Var add_row(Var a, Var row);
Var add_col(Var a, Var col);
Var mul_row(Var a, Var row);
Var mul_col(Var a, Var col);
Var repeat_rows(Var row, Eigen::Index n);

// Products.
Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T
Var transpose(Var a);

// Elementwise nonlinearities.
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var reciprocal(Var a);
Var softplus(Var a);
Var square(Var a);
// sqrt(max(a, eps)); zero gradient where the floor is active.
Var sqrt_floor(Var a, double eps);
Var pow(Var a, double p);  // a >= 0
Var clamp(Var a, double lo, double hi);
Var huber(Var a, double delta);
// cos(acos(c) + m) where mask is 1, identity elsewhere. c is clamped into (-1, 1).
Var angular_margin(Var cosines, const Matrix& mask, double m);

// Reductions.
Var sum_all(Var a);
Var mean_all(Var a);
Var sum_over_rows(Var a);   // -> 1 x cols
Var mean_over_rows(Var a);  // -> 1 x cols
Var sum_over_cols(Var a);   // -> rows x 1

// Softmax family.
Var row_softmax(Var a);
Var col_softmax(Var a);
Var log_softmax_rows(Var a);
// log(sum_j exp(a_ij)) over all columns -> rows x 1.
Var logsumexp_rows(Var a);
// log(1 + sum_{j : mask_ij != 0} exp(a_ij)) -> rows x 1. Empty mask rows yield 0.
Var log1p_sum_exp_rows(Var a, const Matrix& mask);

// Structure.
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index n);
Var gather_rows(Var a, std::span<const int> idx);
// out_i = a(i, cols[i]) -> rows x 1.
Var pick(Var a, std::span<const int> cols);
// Row r of the output is [a_{r-h}, ..., a_{r+h}] with zero padding, h = kernel / 2 (kernel odd).
Var unfold_time(Var a, int kernel);

// L2-normalizes each row. A zero-norm row is a DomainError naming the row.
Var row_normalize(Var a);
// row_normalize(a) * row_normalize(b)^T.
Var pairwise_cosine(Var a, Var b);

// Euclidean distance matrix between the rows of a. Zero distances get a zero gradient.
Var pairwise_distances(Var a);

// Identity in value; blocks gradient.
Var stop_gradient(Var a);
// Identity in value; multiplies the incoming gradient by -scale.
Var grl(Var a, double scale = 1.0);

}  // namespace adml::ad

#endif  // ADML_AUTODIFF_OPS_HPP_
