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

// Reference "opaque" learners. Callers interact with them only through
// fit() and score(), captured by the OpaqueModel concept.

#ifndef STEER_MODELS_HPP_
#define STEER_MODELS_HPP_

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/core.hpp"

namespace steer {

struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;

  static ModelParams zeros(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), 0.0};
  }
  double margin(const OpaqueVec& x) const {
    if (x.size() != weights.size()) throw ShapeError("ModelParams: dimension mismatch");
    return dot(weights, x.values()) + bias;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"weights", p.weights}, {"bias", p.bias}};
}
inline void from_json(const nlohmann::json& j, ModelParams& p) {
  j.at("weights").get_to(p.weights);
  j.at("bias").get_to(p.bias);
}

enum class StepRule {
  kFixed,            // step = learning_rate
  kCurvatureScaled,  // step = learning_rate / curvature bound of the data
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::kFixed;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValueError("TrainConfig: learning_rate must be > 0");
    if (epochs < 1) throw ValueError("TrainConfig: epochs must be >= 1");
    if (!(l2 >= 0.0)) throw ValueError("TrainConfig: l2 must be >= 0");
  }
};

// Bounded output in [-1, 1]; monotone in the margin.
inline double score(const ModelParams& params, const OpaqueVec& x) {
  return std::tanh(params.margin(x));
}

// Ties (score exactly 0) resolve to +1.
inline int predict_label(double s) { return s >= 0.0 ? 1 : -1; }

enum class LossKind { kLogistic, kHinge };

namespace detail {

inline void check_training_set(std::span<const WeightedExample> examples) {
  if (examples.empty()) throw SingleClassError("fit: no training examples");
  const std::size_t dim = examples.front().x.size();
  bool pos = false, neg = false;
  for (const auto& e : examples) {
    if (e.x.size() != dim) throw ShapeError("fit: inconsistent example dimensions");
    (e.y > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw SingleClassError("fit: need at least one example of each label");
}

// log(1 + exp(-m)) without overflow.
inline double softplus_neg(double m) {
  return std::log1p(std::exp(-std::abs(m))) + std::max(-m, 0.0);
}

}  // namespace detail

inline double objective(LossKind kind, const ModelParams& p,
                        std::span<const WeightedExample> examples, double l2) {
  double loss = 0.0;
  for (const auto& e : examples) {
    const double ym = e.y * p.margin(e.x);
    loss += e.w * (kind == LossKind::kLogistic ? detail::softplus_neg(ym)
                                               : std::max(0.0, 1.0 - ym));
  }
  return loss + 0.5 * l2 * dot(p.weights, p.weights);
}

// Gradient (logistic) or subgradient (hinge; 0 at the hinge point) of
// objective(). Bias is unregularized.
inline ModelParams gradient(LossKind kind, const ModelParams& p,
                            std::span<const WeightedExample> examples, double l2) {
  ModelParams g = ModelParams::zeros(p.weights.size());
  for (const auto& e : examples) {
    const double ym = e.y * p.margin(e.x);
    double coef;
    if (kind == LossKind::kLogistic) {
      coef = -e.w * e.y / (1.0 + std::exp(ym));
    } else {
      coef = ym < 1.0 ? -e.w * e.y : 0.0;
    }
    if (coef == 0.0) continue;
    const auto xv = e.x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) g.weights[i] += coef * xv[i];
    g.bias += coef;
  }
  for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += l2 * p.weights[i];
  return g;
}

// Upper bound on the objective's curvature; used by StepRule::kCurvatureScaled.
inline double curvature_bound(LossKind kind,
                              std::span<const WeightedExample> examples, double l2) {
  double s = 0.0;
  for (const auto& e : examples) s += e.w * (dot(e.x.values(), e.x.values()) + 1.0);
  return (kind == LossKind::kLogistic ? 0.25 : 1.0) * s + l2;
}

// Full-batch gradient descent from zero parameters for cfg.epochs steps.
// If `loss_trace` is given it receives the objective before every step and
// after the last one.
inline ModelParams fit_linear(LossKind kind, std::span<const WeightedExample> examples,
                              const TrainConfig& cfg,
                              std::vector<double>* loss_trace = nullptr) {
  cfg.validate();
  detail::check_training_set(examples);
  const double step = cfg.step_rule == StepRule::kFixed
                          ? cfg.learning_rate
                          : cfg.learning_rate / curvature_bound(kind, examples, cfg.l2);
  ModelParams p = ModelParams::zeros(examples.front().x.size());
  if (loss_trace) loss_trace->clear();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (loss_trace) loss_trace->push_back(objective(kind, p, examples, cfg.l2));
    const ModelParams g = gradient(kind, p, examples, cfg.l2);
    for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] -= step * g.weights[i];
    p.bias -= step * g.bias;
    if (!std::isfinite(p.bias)) {
      throw DivergenceError("fit: parameters diverged; lower the learning rate");
    }
  }
  const double final_loss = objective(kind, p, examples, cfg.l2);
  if (loss_trace) loss_trace->push_back(final_loss);
  if (!std::isfinite(final_loss)) {
    throw DivergenceError("fit: non-finite loss; lower the learning rate");
  }
  for (double w : p.weights) {
    if (!std::isfinite(w)) throw DivergenceError("fit: non-finite weights");
  }
  return p;
}

inline ModelParams fit_logistic(std::span<const WeightedExample> examples,
                                const TrainConfig& cfg) {
  return fit_linear(LossKind::kLogistic, examples, cfg);
}

inline ModelParams fit_hinge_ranker(std::span<const WeightedExample> examples,
                                    const TrainConfig& cfg) {
  return fit_linear(LossKind::kHinge, examples, cfg);
}

template <typename M>
concept OpaqueModel = requires(const M& m, std::span<const WeightedExample> ex,
                               const TrainConfig& cfg, const ModelParams& p,
                               const OpaqueVec& x) {
  { m.fit(ex, cfg) } -> std::same_as<ModelParams>;
  { m.score(p, x) } -> std::convertible_to<double>;
};

struct LogisticModel {
  ModelParams fit(std::span<const WeightedExample> ex, const TrainConfig& cfg) const {
    return fit_logistic(ex, cfg);
  }
  double score(const ModelParams& p, const OpaqueVec& x) const { return steer::score(p, x); }
};

struct HingeRanker {
  ModelParams fit(std::span<const WeightedExample> ex, const TrainConfig& cfg) const {
    return fit_hinge_ranker(ex, cfg);
  }
  double score(const ModelParams& p, const OpaqueVec& x) const { return steer::score(p, x); }
};

static_assert(OpaqueModel<LogisticModel>);
static_assert(OpaqueModel<HingeRanker>);

}  // namespace steer

#endif  // STEER_MODELS_HPP_
