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

// Linear surrogate explanations of an opaque model and the policies that
// choose which terms to show.

#ifndef STEER_EXPLAIN_HPP_
#define STEER_EXPLAIN_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "steer/core.hpp"
#include "steer/models.hpp"
#include "steer/random.hpp"
#include "steer/ridge.hpp"

namespace steer {

enum class SurrogateScope { kLocal, kGlobal };

// g(x') = intercept + sum_j weights[j] * x'[j].
struct Surrogate {
  double intercept = 0.0;
  std::vector<double> weights;
  SurrogateScope scope = SurrogateScope::kGlobal;
  std::string anchor_id;  // set for local surrogates

  double evaluate(const InterpVec& x) const {
    if (x.dim() != weights.size()) throw ShapeError("Surrogate: dimension mismatch");
    double s = intercept;
    for (const auto& [j, v] : x.entries()) s += weights[j] * v;
    return s;
  }

  friend bool operator==(const Surrogate&, const Surrogate&) = default;
};

struct Contribution {
  FeatureIndex feature = 0;
  double value = 0.0;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct Explanation {
  std::string instance_id;
  std::vector<Contribution> terms;  // in draw order
};

// The perturbation sample behind a local surrogate. Row r of `masks` has one
// keep flag per entry of `features` (the base's present features); row 0 is
// always the all-ones mask.
struct LocalSamples {
  std::vector<FeatureIndex> features;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<double> targets;
  std::vector<double> weights;
};

template <OpaqueModel Model>
LocalSamples draw_local_samples(const Model& model, const ModelParams& params,
                                const Instance& base, const DomainBridge& bridge,
                                int n_samples, const ProximityKernel& kernel,
                                std::uint64_t seed) {
  LocalSamples s;
  for (const auto& [j, v] : base.x_interp().entries()) s.features.push_back(j);
  const std::size_t m = s.features.size();
  if (m == 0) throw InsufficientSamples("local surrogate: base has no present features");
  if (n_samples < static_cast<int>(m) + 2) {
    throw InsufficientSamples("local surrogate: n_samples must be >= present features + 2");
  }
  Rng rng(seed);
  Mask full(bridge.interp_dim(), 0);
  for (int r = 0; r < n_samples; ++r) {
    std::vector<std::uint8_t> keep(m, 1);
    if (r > 0) {
      for (auto& k : keep) k = rng.bernoulli(0.5) ? 1 : 0;
    }
    for (std::size_t i = 0; i < m; ++i) full[s.features[i]] = keep[i];
    const OpaqueVec realized = bridge.realize(base, full);
    s.targets.push_back(model.score(params, realized));
    s.weights.push_back(
        kernel_weight(interp_distance(base.x_interp().masked(full), base.x_interp()), kernel));
    s.masks.push_back(std::move(keep));
  }
  std::set<std::vector<std::uint8_t>> distinct(s.masks.begin(), s.masks.end());
  if (distinct.size() < 2) {
    throw InsufficientSamples("local surrogate: fewer than 2 distinct masks");
  }
  return s;
}

// Weighted ridge of targets on mask indicators; weights of absent features
// are zero.
inline Surrogate fit_surrogate_from_samples(const LocalSamples& s, std::size_t interp_dim,
                                            double ridge_lambda, std::string anchor_id = {}) {
  const auto n = static_cast<Eigen::Index>(s.masks.size());
  const auto m = static_cast<Eigen::Index>(s.features.size());
  Eigen::MatrixXd z(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) z(r, c) = s.masks[r][c];
  }
  const RidgeSolution sol = solve_weighted_ridge(z, s.targets, s.weights, ridge_lambda);
  Surrogate g;
  g.intercept = sol.intercept;
  g.weights.assign(interp_dim, 0.0);
  for (Eigen::Index c = 0; c < m; ++c) g.weights[s.features[c]] = sol.weights[c];
  g.scope = SurrogateScope::kLocal;
  g.anchor_id = std::move(anchor_id);
  return g;
}

template <OpaqueModel Model>
Surrogate fit_local_surrogate(const Model& model, const ModelParams& params,
                              const Instance& base, const DomainBridge& bridge,
                              int n_samples, const ProximityKernel& kernel,
                              double ridge_lambda, std::uint64_t seed) {
  if (!(ridge_lambda > 0.0)) throw ValueError("local surrogate: ridge_lambda must be > 0");
  const LocalSamples s =
      draw_local_samples(model, params, base, bridge, n_samples, kernel, seed);
  return fit_surrogate_from_samples(s, bridge.interp_dim(), ridge_lambda, base.id());
}

// Corpus-level surrogate. Construct once per corpus; fit() per score vector.
class GlobalSurrogateFitter {
 public:
  GlobalSurrogateFitter(std::span<const InterpVec> rows, double ridge_lambda)
      : ridge_(rows, ridge_lambda) {}

  Surrogate fit(std::span<const double> scores) const {
    RidgeSolution sol = ridge_.solve(scores);
    Surrogate g;
    g.intercept = sol.intercept;
    g.weights = std::move(sol.weights);
    g.scope = SurrogateScope::kGlobal;
    return g;
  }

  std::size_t rows() const noexcept { return ridge_.rows(); }

 private:
  SparseRidge ridge_;
};

inline Surrogate fit_global_surrogate(std::span<const double> scores,
                                      std::span<const InterpVec> interp_matrix,
                                      double ridge_lambda) {
  return GlobalSurrogateFitter(interp_matrix, ridge_lambda).fit(scores);
}

// weights[j] * x'[j] for every present feature; zero products are omitted.
inline std::vector<Contribution> contributions(const Surrogate& g, const InterpVec& x) {
  if (x.dim() != g.weights.size()) throw ShapeError("contributions: dimension mismatch");
  std::vector<Contribution> out;
  for (const auto& [j, v] : x.entries()) {
    const double c = g.weights[j] * v;
    if (c != 0.0) out.push_back({j, c});
  }
  return out;
}

// Suffix-stripping stemmer. Rules are tried in order and the first matching
// suffix wins; a stem shorter than 3 characters reverts to the token. Bigrams
// are stemmed word by word.
inline std::string stem(std::string_view term) {
  if (const auto space = term.find(' '); space != std::string_view::npos) {
    return stem(term.substr(0, space)) + " " + stem(term.substr(space + 1));
  }
  const std::string token(term);
  auto ends_with = [&](std::string_view suf) {
    return token.size() > suf.size() && std::string_view(token).substr(token.size() - suf.size()) == suf;
  };
  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  };
  static constexpr std::string_view kRules[] = {"nesses", "ness", "ities", "ity",
                                                "ing",    "ed",   "es",    "s"};
  for (std::string_view suf : kRules) {
    if (!ends_with(suf)) continue;
    std::string s = token.substr(0, token.size() - suf.size());
    if (suf == "ing") {
      const auto n = s.size();
      if (n >= 2 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) &&
          std::isalpha(static_cast<unsigned char>(s[n - 1]))) {
        s.pop_back();
      }
      if (s.size() < 3) s += 'e';
    }
    return s.size() < 3 ? token : s;
  }
  return token;
}

inline constexpr double kGreedy = std::numeric_limits<double>::infinity();

// Draws up to n_display terms without replacement with probability
// proportional to |value|^gamma, dropping candidates that share a stem with
// an already drawn term. gamma = kGreedy takes terms in descending |value|
// (ties by feature index). `stem_of` maps a feature index to its stem.
inline Explanation select_display_terms(
    std::span<const Contribution> contribs, int n_display, double gamma,
    std::uint64_t seed, const std::function<std::string(FeatureIndex)>& stem_of,
    std::string instance_id = {}) {
  if (n_display < 1) throw ValueError("select_display_terms: n_display must be >= 1");
  if (!(gamma >= 0.0)) throw ValueError("select_display_terms: gamma must be >= 0");
  Explanation out{std::move(instance_id), {}};
  std::vector<Contribution> cand;
  for (const auto& c : contribs) {
    if (c.value != 0.0) cand.push_back(c);
  }
  std::sort(cand.begin(), cand.end(), [](const Contribution& a, const Contribution& b) {
    const double fa = std::abs(a.value), fb = std::abs(b.value);
    return fa != fb ? fa > fb : a.feature < b.feature;
  });
  std::vector<std::string> stems;
  stems.reserve(cand.size());
  for (const auto& c : cand) stems.push_back(stem_of(c.feature));

  std::vector<bool> alive(cand.size(), true);
  std::unordered_set<std::string> used;
  Rng rng(seed);
  const bool greedy = std::isinf(gamma);
  while (static_cast<int>(out.terms.size()) < n_display) {
    std::size_t pick = cand.size();
    if (greedy) {
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (alive[i]) {
          pick = i;
          break;
        }
      }
    } else {
      // Scale by the largest live magnitude so large gamma cannot underflow.
      double top = 0.0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (alive[i]) top = std::max(top, std::abs(cand[i].value));
      }
      if (top == 0.0) break;
      std::vector<double> mass(cand.size(), 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (!alive[i]) continue;
        mass[i] = std::pow(std::abs(cand[i].value) / top, gamma);
        total += mass[i];
      }
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (!alive[i]) continue;
        acc += mass[i];
        pick = i;
        if (u < acc) break;
      }
    }
    if (pick == cand.size()) break;
    out.terms.push_back(cand[pick]);
    used.insert(stems[pick]);
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (alive[i] && used.count(stems[i])) alive[i] = false;
    }
  }
  return out;
}

}  // namespace steer

#endif  // STEER_EXPLAIN_HPP_
