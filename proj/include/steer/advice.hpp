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

// Turns one feature-level advice action into weighted pseudo-examples and
// retrains the opaque model on the augmented labeled set.

#ifndef STEER_ADVICE_HPP_
#define STEER_ADVICE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/core.hpp"
#include "steer/explain.hpp"
#include "steer/models.hpp"
#include "steer/random.hpp"

namespace steer {

struct AdviceAction {
  FeatureIndex feature = 0;
  int polarity = 1;

  AdviceAction(FeatureIndex j, int a) : feature(j), polarity(a) {
    if (a != 1 && a != -1) throw ValueError("AdviceAction: polarity must be +-1");
  }
  friend bool operator==(const AdviceAction&, const AdviceAction&) = default;
};

enum class Provenance { kSampled, kGenerated, kCentroid };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kSampled: return "sampled";
    case Provenance::kGenerated: return "generated";
    case Provenance::kCentroid: return "centroid";
  }
  return "?";
}

struct PseudoExample {
  OpaqueVec x;
  InterpVec x_interp;
  int label = 1;
  double weight = 0.0;
  Provenance provenance = Provenance::kSampled;
  FeatureIndex source_feature = 0;
  std::string source_id;
};

enum class SimilaritySpace { kInterp, kOpaque };

struct PoolNearest {
  int k = 50;
  SimilaritySpace similarity = SimilaritySpace::kInterp;
};

struct GenerativeMask {
  int n = 50;
  double keep_prob = 0.5;
};

// Top pool_top instances by activation of the advised feature, condensed
// into k centroids of consecutive rank groups.
struct CentroidTopActivation {
  int pool_top = 100;
  int k = 1;
};

using GetInstanceStrategy = std::variant<PoolNearest, GenerativeMask, CentroidTopActivation>;

inline void validate(const GetInstanceStrategy& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PoolNearest>) {
          if (v.k < 1) throw ValueError("PoolNearest: k must be >= 1");
        } else if constexpr (std::is_same_v<T, GenerativeMask>) {
          if (v.n < 1) throw ValueError("GenerativeMask: n must be >= 1");
          if (!(v.keep_prob > 0.0 && v.keep_prob < 1.0)) {
            throw ValueError("GenerativeMask: keep_prob must be in (0, 1)");
          }
        } else {
          if (v.pool_top < 1) throw ValueError("CentroidTopActivation: pool_top must be >= 1");
          if (v.k < 1) throw ValueError("CentroidTopActivation: k must be >= 1");
        }
      },
      s);
}

struct UpdateReport {
  int retained_count = 0;
  int discarded_count = 0;
  ModelParams new_params;
  std::vector<PseudoExample> added_examples;
};

inline void to_json(nlohmann::json& j, const UpdateReport& r) {
  nlohmann::json added = nlohmann::json::array();
  for (const auto& p : r.added_examples) {
    added.push_back({{"label", p.label},
                     {"weight", p.weight},
                     {"provenance", to_string(p.provenance)},
                     {"source_feature", p.source_feature},
                     {"source_id", p.source_id}});
  }
  j = nlohmann::json{{"retained_count", r.retained_count},
                     {"discarded_count", r.discarded_count},
                     {"new_params", r.new_params},
                     {"added_examples", std::move(added)}};
}

// The k pool instances most similar to x, by descending cosine similarity
// with ties broken by ascending id. Ids in `exclude` are skipped.
inline std::vector<Instance> get_instances_pool(
    const Instance& x, std::span<const Instance> pool, int k, SimilaritySpace similarity,
    const DomainBridge& bridge, const std::unordered_set<std::string>* exclude = nullptr) {
  if (k < 1) throw ValueError("get_instances_pool: k must be >= 1");
  struct Scored {
    double sim;
    const Instance* inst;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  const double xx = x.x_interp().squared_norm();
  for (const auto& p : pool) {
    if (exclude && exclude->count(p.id())) continue;
    double sim;
    if (similarity == SimilaritySpace::kOpaque) {
      sim = bridge.opaque_similarity(x.x(), p.x());
    } else {
      const double pp = p.x_interp().squared_norm();
      sim = (xx == 0.0 || pp == 0.0) ? 0.0 : x.x_interp().dot(p.x_interp()) / std::sqrt(xx * pp);
    }
    scored.push_back({sim, &p});
  }
  if (scored.empty()) throw EmptyPoolError("get_instances_pool: pool is empty");
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  auto better = [](const Scored& a, const Scored& b) {
    return a.sim != b.sim ? a.sim > b.sim : a.inst->id() < b.inst->id();
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  std::vector<Instance> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(*scored[i].inst);
  return out;
}

// n masked variants of x: each present feature kept with probability
// keep_prob, realized through the bridge.
inline std::vector<Instance> get_instances_generative(const Instance& x,
                                                      const DomainBridge& bridge, int n,
                                                      double keep_prob, std::uint64_t seed) {
  if (n < 1) throw ValueError("get_instances_generative: n must be >= 1");
  Rng rng(seed);
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(n));
  Mask mask(bridge.interp_dim(), 0);
  for (int i = 0; i < n; ++i) {
    std::fill(mask.begin(), mask.end(), 0);
    for (const auto& [j, v] : x.x_interp().entries()) mask[j] = rng.bernoulli(keep_prob) ? 1 : 0;
    out.push_back(bridge.realize_instance(x, mask, x.id() + "#g" + std::to_string(i)));
  }
  return out;
}

// Pool instances with the highest activation of feature j (ties by id),
// at most pool_top of them, condensed into k mean vectors. Each result
// carries the mean opaque vector and the mean interpretable vector.
inline std::vector<PseudoExample> centroid_pseudoexamples(std::span<const Instance> pool,
                                                          FeatureIndex j, int polarity,
                                                          int pool_top, int k,
                                                          double advice_weight) {
  if (pool_top < 1 || k < 1) throw ValueError("centroid: pool_top and k must be >= 1");
  std::vector<const Instance*> hits;
  for (const auto& p : pool) {
    if (p.x_interp().activation(j) > 0.0) hits.push_back(&p);
  }
  if (hits.empty()) {
    throw FeatureUnsupportedError("term not present in corpus pool");
  }
  std::sort(hits.begin(), hits.end(), [j](const Instance* a, const Instance* b) {
    const double va = a->x_interp().activation(j), vb = b->x_interp().activation(j);
    return va != vb ? va > vb : a->id() < b->id();
  });
  hits.resize(std::min<std::size_t>(hits.size(), static_cast<std::size_t>(pool_top)));
  const std::size_t groups = std::min<std::size_t>(static_cast<std::size_t>(k), hits.size());
  std::vector<PseudoExample> out;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * hits.size() / groups;
    const std::size_t hi = (g + 1) * hits.size() / groups;
    const double inv = 1.0 / static_cast<double>(hi - lo);
    std::vector<double> mean(hits[lo]->x().size(), 0.0);
    std::vector<double> mean_interp(hits[lo]->x_interp().dim(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto xv = hits[i]->x().values();
      for (std::size_t d = 0; d < xv.size(); ++d) mean[d] += xv[d];
      for (const auto& [f, v] : hits[i]->x_interp().entries()) mean_interp[f] += v;
    }
    for (double& v : mean) v *= inv;
    for (double& v : mean_interp) v *= inv;
    PseudoExample pe;
    pe.x = OpaqueVec(std::move(mean));
    pe.x_interp = InterpVec::from_dense(mean_interp);
    pe.label = polarity;
    pe.weight = advice_weight;
    pe.provenance = Provenance::kCentroid;
    pe.source_feature = j;
    pe.source_id = "centroid:" + std::to_string(j) + ":" + std::to_string(g);
    out.push_back(std::move(pe));
  }
  return out;
}

inline PseudoExample centroid_pseudoexample(std::span<const Instance> pool, FeatureIndex j,
                                            int polarity, int pool_top, double advice_weight) {
  return std::move(centroid_pseudoexamples(pool, j, polarity, pool_top, 1, advice_weight).front());
}

struct CollectedAdvice {
  std::vector<PseudoExample> retained;
  int discarded = 0;
};

// First half of an update: candidates from the strategy, filtered to those
// where the advised feature is present, labeled with the action's polarity
// and weighted by proximity to the anchor. Centroid candidates carry the
// plain advice weight. Pool and generative strategies require an anchor.
inline CollectedAdvice collect_pseudo_examples(const Dataset& data, const Instance* anchor,
                                               const AdviceAction& action,
                                               const GetInstanceStrategy& strategy,
                                               const DomainBridge& bridge,
                                               const ProximityKernel& kernel,
                                               double advice_weight, std::uint64_t seed = 0) {
  validate(strategy);
  if (!(advice_weight > 0.0)) throw ValueError("limeade_update: advice_weight must be > 0");
  if (action.feature >= bridge.interp_dim()) {
    throw ShapeError("limeade_update: feature index out of range");
  }
  CollectedAdvice out;
  const FeatureIndex j = action.feature;

  if (const auto* c = std::get_if<CentroidTopActivation>(&strategy)) {
    for (auto& pe : centroid_pseudoexamples(data.pool_view(), j, action.polarity, c->pool_top,
                                            c->k, advice_weight)) {
      if (pe.x_interp.activation(j) > 0.0) {
        out.retained.push_back(std::move(pe));
      } else {
        ++out.discarded;
      }
    }
    return out;
  }

  if (!anchor) throw ValueError("limeade_update: strategy requires an anchor instance");
  std::vector<Instance> candidates;
  Provenance prov;
  if (const auto* p = std::get_if<PoolNearest>(&strategy)) {
    candidates = get_instances_pool(*anchor, data.pool_view(), p->k, p->similarity, bridge,
                                    &data.consumed);
    prov = Provenance::kSampled;
  } else {
    const auto& g = std::get<GenerativeMask>(strategy);
    candidates = get_instances_generative(*anchor, bridge, g.n, g.keep_prob, seed);
    prov = Provenance::kGenerated;
  }
  for (auto& cand : candidates) {
    if (!(cand.x_interp().activation(j) > 0.0)) {
      ++out.discarded;
      continue;
    }
    const double w =
        advice_weight * kernel_weight(interp_distance(cand.x_interp(), anchor->x_interp()), kernel);
    if (!(w > 0.0)) {
      ++out.discarded;
      continue;
    }
    PseudoExample pe;
    pe.x = cand.x();
    pe.x_interp = cand.x_interp();
    pe.label = action.polarity;
    pe.weight = w;
    pe.provenance = prov;
    pe.source_feature = j;
    pe.source_id = cand.id();
    out.retained.push_back(std::move(pe));
  }
  return out;
}

// Second half: append and retrain from scratch. Either both happen or the
// dataset is left untouched. With nothing to add, params_t is returned.
template <OpaqueModel Model>
UpdateReport apply_pseudo_examples(const Model& model, const ModelParams& params_t,
                                   Dataset& data, CollectedAdvice collected,
                                   const TrainConfig& cfg) {
  UpdateReport report;
  report.discarded_count = collected.discarded;
  if (collected.retained.empty()) {
    report.new_params = params_t;
    return report;
  }
  std::vector<WeightedExample> augmented = data.labeled;
  augmented.reserve(augmented.size() + collected.retained.size());
  for (const auto& pe : collected.retained) augmented.emplace_back(pe.x, pe.label, pe.weight);
  report.new_params = model.fit(augmented, cfg);
  data.labeled = std::move(augmented);
  report.retained_count = static_cast<int>(collected.retained.size());
  report.added_examples = std::move(collected.retained);
  return report;
}

template <OpaqueModel Model>
UpdateReport limeade_update(const Model& model, const ModelParams& params_t, Dataset& data,
                            const Instance* anchor, const AdviceAction& action,
                            const GetInstanceStrategy& strategy, const DomainBridge& bridge,
                            const ProximityKernel& kernel, double advice_weight,
                            const TrainConfig& cfg, std::uint64_t seed = 0) {
  return apply_pseudo_examples(
      model, params_t, data,
      collect_pseudo_examples(data, anchor, action, strategy, bridge, kernel, advice_weight,
                              seed),
      cfg);
}

enum class AdviceCase { kFalseNegative, kFalsePositive };

// Simulated user. False negatives get +1 on the lowest-index ground-truth
// feature; false positives get -1 on the largest-|contribution| feature
// outside the ground truth (ties by lower index).
inline AdviceAction simulate_advice_for_instance(std::span<const FeatureIndex> truth,
                                                 std::span<const Contribution> explanation,
                                                 AdviceCase which) {
  if (which == AdviceCase::kFalseNegative) {
    if (truth.empty()) throw NoAdviceAvailable("no ground-truth feature to endorse");
    return AdviceAction(*std::min_element(truth.begin(), truth.end()), 1);
  }
  const std::unordered_set<FeatureIndex> in_truth(truth.begin(), truth.end());
  const Contribution* best = nullptr;
  for (const auto& c : explanation) {
    if (in_truth.count(c.feature) || c.value == 0.0) continue;
    if (!best || std::abs(c.value) > std::abs(best->value) ||
        (std::abs(c.value) == std::abs(best->value) && c.feature < best->feature)) {
      best = &c;
    }
  }
  if (!best) throw NoAdviceAvailable("no explanation feature outside the ground truth");
  return AdviceAction(best->feature, -1);
}

}  // namespace steer

#endif  // STEER_ADVICE_HPP_
