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

#include "adml/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adml::ad {

namespace {

Graph& graph_of(Var a) { return *a.graph; }

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw StructuralError(std::string("autodiff ") + op + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  return graph_of(a).record(a.value() + b.value(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(b, go);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  return graph_of(a).record(a.value() - b.value(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(b, -go);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  return graph_of(a).record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct(b.value()));
    g.accumulate(b, go.cwiseProduct(a.value()));
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  return graph_of(a).record(a.value() * c, {a}, [a, c](Graph& g, const Matrix& go) { g.accumulate(a, go * c); });
}

Var add_scalar(Var a, double c) {
  return graph_of(a).record((a.value().array() + c).matrix(), {a},
                            [a](Graph& g, const Matrix& go) { g.accumulate(a, go); });
}

Var scale_by(Var a, Var s) {
  if (s.rows() != 1 || s.cols() != 1) throw StructuralError("autodiff scale_by: scale must be 1x1");
  return graph_of(a).record(a.value() * s.scalar(), {a, s}, [a, s](Graph& g, const Matrix& go) {
    g.accumulate(a, go * s.scalar());
    g.accumulate(s, Matrix::Constant(1, 1, go.cwiseProduct(a.value()).sum()));
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw StructuralError("autodiff add_row: shape mismatch");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return graph_of(a).record(std::move(out), {a, row}, [a, row](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(row, go.colwise().sum());
  });
}

Var add_col(Var a, Var col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw StructuralError("autodiff add_col: shape mismatch");
  Matrix out = a.value().colwise() + col.value().col(0);
  return graph_of(a).record(std::move(out), {a, col}, [a, col](Graph& g, const Matrix& go) {
    g.accumulate(a, go);
    g.accumulate(col, go.rowwise().sum());
  });
}

Var mul_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw StructuralError("autodiff mul_row: shape mismatch");
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return graph_of(a).record(std::move(out), {a, row}, [a, row](Graph& g, const Matrix& go) {
    g.accumulate(a, (go.array().rowwise() * row.value().row(0).array()).matrix());
    g.accumulate(row, go.cwiseProduct(a.value()).colwise().sum());
  });
}

Var mul_col(Var a, Var col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw StructuralError("autodiff mul_col: shape mismatch");
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return graph_of(a).record(std::move(out), {a, col}, [a, col](Graph& g, const Matrix& go) {
    g.accumulate(a, (go.array().colwise() * col.value().col(0).array()).matrix());
    g.accumulate(col, go.cwiseProduct(a.value()).rowwise().sum());
  });
}

Var repeat_rows(Var row, Eigen::Index n) {
  if (row.rows() != 1) throw StructuralError("autodiff repeat_rows: input must be a row");
  Matrix out = row.value().replicate(n, 1);
  return graph_of(row).record(std::move(out), {row},
                              [row](Graph& g, const Matrix& go) { g.accumulate(row, go.colwise().sum()); });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw StructuralError("autodiff matmul: inner dimension mismatch");
  return graph_of(a).record(a.value() * b.value(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    if (g.requires_grad(a)) g.accumulate(a, go * b.value().transpose());
    if (g.requires_grad(b)) g.accumulate(b, a.value().transpose() * go);
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw StructuralError("autodiff matmul_nt: inner dimension mismatch");
  return graph_of(a).record(a.value() * b.value().transpose(), {a, b}, [a, b](Graph& g, const Matrix& go) {
    if (g.requires_grad(a)) g.accumulate(a, go * b.value());
    if (g.requires_grad(b)) g.accumulate(b, go.transpose() * a.value());
  });
}

Var transpose(Var a) {
  return graph_of(a).record(a.value().transpose(), {a},
                            [a](Graph& g, const Matrix& go) { g.accumulate(a, go.transpose()); });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return graph_of(a).record(std::move(out), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, (a.value().array() > 0.0).select(go, 0.0));
  });
}

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  Matrix y = out;
  return graph_of(a).record(std::move(out), {a}, [a, y = std::move(y)](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value().unaryExpr(&stable_sigmoid);
  Matrix y = out;
  return graph_of(a).record(std::move(out), {a}, [a, y = std::move(y)](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp().matrix();
  Matrix y = out;
  return graph_of(a).record(std::move(out), {a}, [a, y = std::move(y)](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct(y));
  });
}

Var log(Var a) {
  return graph_of(a).record(a.value().array().log().matrix(), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseQuotient(a.value()));
  });
}

Var reciprocal(Var a) {
  return graph_of(a).record(a.value().cwiseInverse(), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, -go.cwiseQuotient(a.value().cwiseAbs2()));
  });
}

Var softplus(Var a) {
  return graph_of(a).record(a.value().unaryExpr(&stable_softplus), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct(a.value().unaryExpr(&stable_sigmoid)));
  });
}

Var square(Var a) {
  return graph_of(a).record(a.value().cwiseAbs2(), {a},
                            [a](Graph& g, const Matrix& go) { g.accumulate(a, 2.0 * go.cwiseProduct(a.value())); });
}

Var sqrt_floor(Var a, double eps) {
  Matrix out = a.value().cwiseMax(eps).cwiseSqrt();
  Matrix y = out;
  return graph_of(a).record(std::move(out), {a}, [a, eps, y = std::move(y)](Graph& g, const Matrix& go) {
    Matrix d = (a.value().array() > eps).select((0.5 * go.array() / y.array()).matrix(), 0.0);
    g.accumulate(a, d);
  });
}

Var pow(Var a, double p) {
  if ((a.value().array() < 0.0).any()) throw DomainError("autodiff pow: negative base");
  return graph_of(a).record(a.value().array().pow(p).matrix(), {a}, [a, p](Graph& g, const Matrix& go) {
    g.accumulate(a, go.cwiseProduct((p * a.value().array().pow(p - 1.0)).matrix()));
  });
}

Var clamp(Var a, double lo, double hi) {
  return graph_of(a).record(a.value().cwiseMax(lo).cwiseMin(hi), {a}, [a, lo, hi](Graph& g, const Matrix& go) {
    const auto& x = a.value().array();
    g.accumulate(a, ((x > lo) && (x < hi)).select(go, 0.0));
  });
}

Var huber(Var a, double delta) {
  Matrix out = a.value().unaryExpr([delta](double x) {
    const double ax = std::abs(x);
    return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
  });
  return graph_of(a).record(std::move(out), {a}, [a, delta](Graph& g, const Matrix& go) {
    Matrix d = a.value().unaryExpr([delta](double x) { return std::clamp(x, -delta, delta); });
    g.accumulate(a, go.cwiseProduct(d));
  });
}

Var angular_margin(Var cosines, const Matrix& mask, double m) {
  if (mask.rows() != cosines.rows() || mask.cols() != cosines.cols()) {
    throw StructuralError("autodiff angular_margin: mask shape mismatch");
  }
  if (m == 0.0) return cosines;
  constexpr double kLimit = 1.0 - 1e-7;
  const Matrix& c = cosines.value();
  Matrix out = c;
  Matrix deriv = Matrix::Ones(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      const double cc = std::clamp(c(i, j), -kLimit, kLimit);
      const double theta = std::acos(cc);
      out(i, j) = std::cos(theta + m);
      deriv(i, j) = std::sin(theta + m) / std::sin(theta);
    }
  }
  return graph_of(cosines).record(std::move(out), {cosines},
                                  [cosines, deriv = std::move(deriv)](Graph& g, const Matrix& go) {
                                    g.accumulate(cosines, go.cwiseProduct(deriv));
                                  });
}

Var sum_all(Var a) {
  return graph_of(a).record(Matrix::Constant(1, 1, a.value().sum()), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, Matrix::Constant(a.rows(), a.cols(), go(0, 0)));
  });
}

Var mean_all(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw StructuralError("autodiff mean_all: empty input");
  return scale(sum_all(a), 1.0 / n);
}

Var sum_over_rows(Var a) {
  return graph_of(a).record(a.value().colwise().sum(), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, go.replicate(a.rows(), 1));
  });
}

Var mean_over_rows(Var a) {
  if (a.rows() == 0) throw StructuralError("autodiff mean_over_rows: no rows");
  return scale(sum_over_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Var sum_over_cols(Var a) {
  return graph_of(a).record(a.value().rowwise().sum(), {a}, [a](Graph& g, const Matrix& go) {
    g.accumulate(a, go.replicate(1, a.cols()));
  });
}

namespace {

Matrix softmax_rows_value(const Matrix& x) {
  Matrix y = x.colwise() - x.rowwise().maxCoeff();
  y = y.array().exp().matrix();
  Eigen::VectorXd s = y.rowwise().sum();
  return y.array().colwise() / s.array();
}

}  // namespace

Var row_softmax(Var a) {
  Matrix y = softmax_rows_value(a.value());
  Matrix yc = y;
  return graph_of(a).record(std::move(y), {a}, [a, y = std::move(yc)](Graph& g, const Matrix& go) {
    Eigen::VectorXd dot = go.cwiseProduct(y).rowwise().sum();
    g.accumulate(a, y.cwiseProduct((go.colwise() - dot)));
  });
}

Var col_softmax(Var a) {
  Matrix y = softmax_rows_value(a.value().transpose()).transpose();
  Matrix yc = y;
  return graph_of(a).record(std::move(y), {a}, [a, y = std::move(yc)](Graph& g, const Matrix& go) {
    RowVector dot = go.cwiseProduct(y).colwise().sum();
    g.accumulate(a, y.cwiseProduct((go.rowwise() - dot)));
  });
}

Var log_softmax_rows(Var a) {
  const Matrix& x = a.value();
  Eigen::VectorXd mx = x.rowwise().maxCoeff();
  Eigen::VectorXd lse = ((x.colwise() - mx).array().exp().rowwise().sum().log()).matrix() + mx;
  Matrix out = x.colwise() - lse;
  Matrix p = out.array().exp().matrix();
  return graph_of(a).record(std::move(out), {a}, [a, p = std::move(p)](Graph& g, const Matrix& go) {
    Eigen::VectorXd s = go.rowwise().sum();
    g.accumulate(a, go - (p.array().colwise() * s.array()).matrix());
  });
}

Var logsumexp_rows(Var a) {
  const Matrix& x = a.value();
  if (x.cols() == 0) throw StructuralError("autodiff logsumexp_rows: no columns");
  Eigen::VectorXd mx = x.rowwise().maxCoeff();
  Eigen::VectorXd lse = ((x.colwise() - mx).array().exp().rowwise().sum().log()).matrix() + mx;
  Matrix p = (x.colwise() - lse).array().exp().matrix();
  return graph_of(a).record(Matrix(lse), {a}, [a, p = std::move(p)](Graph& g, const Matrix& go) {
    g.accumulate(a, (p.array().colwise() * go.col(0).array()).matrix());
  });
}

Var log1p_sum_exp_rows(Var a, const Matrix& mask) {
  const Matrix& x = a.value();
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw StructuralError("autodiff log1p_sum_exp_rows: mask shape mismatch");
  }
  Matrix out(x.rows(), 1);
  Matrix w = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) m = std::max(m, x(i, j));
    }
    double s = std::exp(-m);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) s += std::exp(x(i, j) - m);
    }
    out(i, 0) = m + std::log(s);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0.0) w(i, j) = std::exp(x(i, j) - out(i, 0));
    }
  }
  return graph_of(a).record(std::move(out), {a}, [a, w = std::move(w)](Graph& g, const Matrix& go) {
    g.accumulate(a, (w.array().colwise() * go.col(0).array()).matrix());
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw StructuralError("autodiff concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (Var p : parts) {
    if (p.cols() != cols) throw StructuralError("autodiff concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return graph_of(parts.front()).record(std::move(out), parts, [parts](Graph& g, const Matrix& go) {
    Eigen::Index r0 = 0;
    for (Var p : parts) {
      if (g.requires_grad(p)) g.accumulate(p, go.middleRows(r0, p.rows()));
      r0 += p.rows();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw StructuralError("autodiff concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts.front().rows();
  for (Var p : parts) {
    if (p.rows() != rows) throw StructuralError("autodiff concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return graph_of(parts.front()).record(std::move(out), parts, [parts](Graph& g, const Matrix& go) {
    Eigen::Index c0 = 0;
    for (Var p : parts) {
      if (g.requires_grad(p)) g.accumulate(p, go.middleCols(c0, p.cols()));
      c0 += p.cols();
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || n < 0 || start + n > a.rows()) throw StructuralError("autodiff slice_rows: out of range");
  return graph_of(a).record(a.value().middleRows(start, n), {a}, [a, start, n](Graph& g, const Matrix& go) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    full.middleRows(start, n) = go;
    g.accumulate(a, full);
  });
}

Var gather_rows(Var a, std::span<const int> idx) {
  std::vector<int> index(idx.begin(), idx.end());
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || index[r] >= a.rows()) {
      throw DomainError("autodiff gather_rows: index " + std::to_string(index[r]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(r)) = a.value().row(index[r]);
  }
  return graph_of(a).record(std::move(out), {a}, [a, index = std::move(index)](Graph& g, const Matrix& go) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t r = 0; r < index.size(); ++r) full.row(index[r]) += go.row(static_cast<Eigen::Index>(r));
    g.accumulate(a, full);
  });
}

Var pick(Var a, std::span<const int> cols) {
  if (static_cast<Eigen::Index>(cols.size()) != a.rows()) throw StructuralError("autodiff pick: one column per row");
  std::vector<int> index(cols.begin(), cols.end());
  Matrix out(a.rows(), 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const int c = index[static_cast<std::size_t>(i)];
    if (c < 0 || c >= a.cols()) throw DomainError("autodiff pick: column " + std::to_string(c) + " out of range");
    out(i, 0) = a.value()(i, c);
  }
  return graph_of(a).record(std::move(out), {a}, [a, index = std::move(index)](Graph& g, const Matrix& go) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) full(i, index[static_cast<std::size_t>(i)]) = go(i, 0);
    g.accumulate(a, full);
  });
}

Var unfold_time(Var a, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw StructuralError("autodiff unfold_time: kernel must be odd");
  const Eigen::Index t_len = a.rows();
  const Eigen::Index c = a.cols();
  const int half = kernel / 2;
  Matrix out = Matrix::Zero(t_len, c * kernel);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index src = t + j - half;
      if (src >= 0 && src < t_len) out.block(t, j * c, 1, c) = a.value().row(src);
    }
  }
  return graph_of(a).record(std::move(out), {a}, [a, kernel, half](Graph& g, const Matrix& go) {
    const Eigen::Index tl = a.rows();
    const Eigen::Index cc = a.cols();
    Matrix full = Matrix::Zero(tl, cc);
    for (Eigen::Index t = 0; t < tl; ++t) {
      for (int j = 0; j < kernel; ++j) {
        const Eigen::Index src = t + j - half;
        if (src >= 0 && src < tl) full.row(src) += go.block(t, j * cc, 1, cc);
      }
    }
    g.accumulate(a, full);
  });
}

Var row_normalize(Var a) {
  const Matrix& x = a.value();
  Eigen::VectorXd norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) throw DomainError("row_normalize: row " + std::to_string(i) + " has zero norm");
  }
  Matrix y = x.array().colwise() / norms.array();
  Matrix yc = y;
  return graph_of(a).record(std::move(y), {a},
                            [a, y = std::move(yc), norms = std::move(norms)](Graph& g, const Matrix& go) {
                              Eigen::VectorXd dot = go.cwiseProduct(y).rowwise().sum();
                              Matrix d = go - (y.array().colwise() * dot.array()).matrix();
                              g.accumulate(a, (d.array().colwise() / norms.array()).matrix());
                            });
}

Var pairwise_cosine(Var a, Var b) { return matmul_nt(row_normalize(a), row_normalize(b)); }

Var pairwise_distances(Var a) {
  const Matrix& x = a.value();
  const Eigen::Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    }
  }
  Matrix dc = d;
  return graph_of(a).record(std::move(d), {a}, [a, d = std::move(dc)](Graph& g, const Matrix& go) {
    const Matrix& xv = a.value();
    const Eigen::Index nn = xv.rows();
    Matrix full = Matrix::Zero(nn, xv.cols());
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        if (i == j || d(i, j) == 0.0) continue;
        const double w = (go(i, j) + go(j, i)) / d(i, j);
        if (j > i) {
          full.row(i) += w * (xv.row(i) - xv.row(j));
          full.row(j) -= w * (xv.row(i) - xv.row(j));
        }
      }
    }
    g.accumulate(a, full);
  });
}

Var stop_gradient(Var a) { return graph_of(a).constant(a.value()); }

Var grl(Var a, double scale) {
  return graph_of(a).record(a.value(), {a}, [a, scale](Graph& g, const Matrix& go) { g.accumulate(a, -scale * go); });
}

}  // namespace adml::ad
