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

#ifndef STEER_TESTS_TEST_UTIL_HPP_
#define STEER_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "steer/core.hpp"
#include "steer/models.hpp"
#include "steer/random.hpp"

namespace steer::testing {

// Opaque vector = A * x', a linear map of the interpretable vector.
class DenseBridge final : public DomainBridge {
 public:
  explicit DenseBridge(std::vector<std::vector<double>> a) : a_(std::move(a)) {}

  static DenseBridge identity(std::size_t n) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
    return DenseBridge(std::move(a));
  }

  static DenseBridge random(std::size_t out, std::size_t in, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> a(out, std::vector<double>(in));
    for (auto& row : a) {
      for (auto& v : row) v = rng.normal();
    }
    return DenseBridge(std::move(a));
  }

  std::size_t interp_dim() const override { return a_.empty() ? 0 : a_[0].size(); }

  OpaqueVec map(const InterpVec& xi) const {
    std::vector<double> out(a_.size(), 0.0);
    for (std::size_t r = 0; r < a_.size(); ++r) {
      for (const auto& [j, v] : xi.entries()) out[r] += a_[r][j] * v;
    }
    return OpaqueVec(std::move(out));
  }

  OpaqueVec realize(const Instance& base, const Mask& mask) const override {
    return map(base.x_interp().masked(mask));
  }

  Instance make(std::string id, const InterpVec& xi) const {
    OpaqueVec x = map(xi);
    pair(x, xi);
    return Instance(std::move(id), std::move(x), xi, *this);
  }

  Instance make(std::string id, std::vector<double> dense) const {
    return make(std::move(id), InterpVec::from_dense(dense));
  }

 private:
  std::vector<std::vector<double>> a_;
};

// score = w.x + b with no squashing; an exactly linear opaque model.
struct LinearScoreModel {
  ModelParams fit(std::span<const WeightedExample> ex, const TrainConfig&) const {
    return ModelParams::zeros(ex.empty() ? 0 : ex.front().x.size());
  }
  double score(const ModelParams& p, const OpaqueVec& x) const { return p.margin(x); }
};

// A deliberately constant model.
struct ConstantModel {
  double value = 0.3;
  ModelParams fit(std::span<const WeightedExample> ex, const TrainConfig&) const {
    return ModelParams::zeros(ex.empty() ? 0 : ex.front().x.size());
  }
  double score(const ModelParams&, const OpaqueVec&) const { return value; }
};

// Dense Gaussian elimination with partial pivoting; independent of Eigen.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Weighted ridge with an unpenalized intercept, via normal equations.
// Returns {intercept, w_0, ..., w_{m-1}}.
inline std::vector<double> ridge_oracle(const std::vector<std::vector<double>>& z,
                                        const std::vector<double>& y,
                                        const std::vector<double>& w, double lambda) {
  const std::size_t m = z.empty() ? 0 : z[0].size();
  const std::size_t p = m + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t r = 0; r < z.size(); ++r) {
    std::vector<double> row(p, 1.0);
    for (std::size_t c = 0; c < m; ++c) row[c + 1] = z[r][c];
    for (std::size_t i = 0; i < p; ++i) {
      b[i] += w[r] * row[i] * y[r];
      for (std::size_t k = 0; k < p; ++k) a[i][k] += w[r] * row[i] * row[k];
    }
  }
  for (std::size_t i = 1; i < p; ++i) a[i][i] += lambda;
  return gauss_solve(std::move(a), std::move(b));
}

}  // namespace steer::testing

#endif  // STEER_TESTS_TEST_UTIL_HPP_
