// Copyright 2026 The Steer Authors.
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

#ifndef STEER_RIDGE_HPP_
#define STEER_RIDGE_HPP_

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "steer/core.hpp"

namespace steer {

struct RidgeSolution {
  double intercept = 0.0;
  std::vector<double> weights;
};

namespace detail {

inline RidgeSolution solve_augmented(const Eigen::MatrixXd& gram,
                                     const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericError("ridge: normal equations are singular; raise ridge_lambda");
  }
  const Eigen::VectorXd beta = llt.solve(rhs);
  if (!beta.allFinite()) throw NumericError("ridge: non-finite solution");
  RidgeSolution sol;
  sol.intercept = beta[0];
  sol.weights.assign(beta.data() + 1, beta.data() + beta.size());
  return sol;
}

}  // namespace detail

// argmin sum_i w_i (y_i - b - z_i . beta)^2 + lambda ||beta||^2, intercept b
// unpenalized. Rows of `z` are samples.
inline RidgeSolution solve_weighted_ridge(const Eigen::MatrixXd& z,
                                          std::span<const double> y,
                                          std::span<const double> w, double lambda) {
  const auto n = z.rows();
  const auto p = z.cols();
  if (static_cast<std::size_t>(n) != y.size() || y.size() != w.size()) {
    throw ShapeError("ridge: sample count mismatch");
  }
  if (!(lambda > 0.0)) throw ValueError("ridge: lambda must be > 0");
  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = z;
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), n);
  Eigen::MatrixXd gram = a.transpose() * wv.asDiagonal() * a;
  gram.diagonal().tail(p).array() += lambda;
  const Eigen::VectorXd rhs = a.transpose() * (wv.cwiseProduct(yv));
  return detail::solve_augmented(gram, rhs);
}

// Unweighted ridge over a fixed set of sparse rows. The factorization is
// computed once; solve() is cheap, so the same fitter can be reused as the
// targets change.
class SparseRidge {
 public:
  SparseRidge(std::span<const InterpVec> rows, double lambda)
      : dim_(rows.empty() ? 0 : rows.front().dim()), rows_(rows.begin(), rows.end()) {
    if (rows_.size() < 2) throw InsufficientSamples("ridge: need at least 2 rows");
    if (!(lambda > 0.0)) throw ValueError("ridge: lambda must be > 0");
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim_ + 1, dim_ + 1);
    for (const auto& r : rows_) {
      if (r.dim() != dim_) throw ShapeError("ridge: inconsistent row dimensions");
      gram(0, 0) += 1.0;
      for (const auto& [i, vi] : r.entries()) {
        gram(0, i + 1) += vi;
        gram(i + 1, 0) += vi;
        for (const auto& [j, vj] : r.entries()) gram(i + 1, j + 1) += vi * vj;
      }
    }
    gram.diagonal().tail(dim_).array() += lambda;
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success) {
      throw NumericError("ridge: normal equations are singular; raise ridge_lambda");
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  RidgeSolution solve(std::span<const double> y) const {
    if (y.size() != rows_.size()) throw ShapeError("ridge: target count mismatch");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_ + 1);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      rhs[0] += y[k];
      for (const auto& [i, v] : rows_[k].entries()) rhs[i + 1] += v * y[k];
    }
    const Eigen::VectorXd beta = llt_.solve(rhs);
    if (!beta.allFinite()) throw NumericError("ridge: non-finite solution");
    RidgeSolution sol;
    sol.intercept = beta[0];
    sol.weights.assign(beta.data() + 1, beta.data() + beta.size());
    return sol;
  }

 private:
  std::size_t dim_;
  std::vector<InterpVec> rows_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace steer

#endif  // STEER_RIDGE_HPP_
