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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "steer/advice.hpp"
#include "steer/errors.hpp"
#include "steer/explain.hpp"
#include "steer/synthetic.hpp"
#include "test_util.hpp"

namespace steer {
namespace {

using testing::DenseBridge;

std::shared_ptr<const std::vector<Instance>> share(std::vector<Instance> v) {
  return std::make_shared<const std::vector<Instance>>(std::move(v));
}

TEST(PoolNearestTest, ExactDuplicateComesFirst) {
  const DenseBridge bridge = DenseBridge::random(5, 4, 1);
  const Instance x = bridge.make("x", std::vector<double>{1, 0.5, 0, 2});
  std::vector<Instance> pool{bridge.make("a", std::vector<double>{0, 1, 1, 0}),
                             bridge.make("dup", std::vector<double>{1, 0.5, 0, 2}),
                             bridge.make("b", std::vector<double>{1, 0, 0, 1})};
  for (SimilaritySpace s : {SimilaritySpace::kInterp, SimilaritySpace::kOpaque}) {
    const auto got = get_instances_pool(x, pool, 1, s, bridge);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].id(), "dup");
  }
}

TEST(PoolNearestTest, OrderMatchesBruteForceCosines) {
  const DenseBridge bridge = DenseBridge::identity(3);
  const Instance x = bridge.make("x", std::vector<double>{1, 1, 0});
  std::vector<Instance> pool{bridge.make("p", std::vector<double>{0, 0, 1}),
                             bridge.make("q", std::vector<double>{1, 0, 0}),
                             bridge.make("r", std::vector<double>{2, 1, 0})};
  // cos(x,p)=0, cos(x,q)=1/sqrt2, cos(x,r)=3/sqrt10.
  std::vector<std::pair<double, std::string>> brute{
      {0.0, "p"}, {1.0 / std::sqrt(2.0), "q"}, {3.0 / std::sqrt(10.0), "r"}};
  std::sort(brute.begin(), brute.end(), [](auto& a, auto& b) { return a.first > b.first; });
  const auto got = get_instances_pool(x, pool, 3, SimilaritySpace::kInterp, bridge);
  ASSERT_EQ(got.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(got[i].id(), brute[i].second);
}

TEST(PoolNearestTest, TiesBrokenByLowerId) {
  const DenseBridge bridge = DenseBridge::identity(2);
  const Instance x = bridge.make("x", std::vector<double>{1, 0});
  std::vector<Instance> pool{bridge.make("zz", std::vector<double>{2, 0}),
                             bridge.make("aa", std::vector<double>{3, 0}),
                             bridge.make("mm", std::vector<double>{0, 1})};
  const auto got = get_instances_pool(x, pool, 2, SimilaritySpace::kInterp, bridge);
  EXPECT_EQ(got[0].id(), "aa");
  EXPECT_EQ(got[1].id(), "zz");
}

TEST(PoolNearestTest, ExclusionAndEmptyPool) {
  const DenseBridge bridge = DenseBridge::identity(2);
  const Instance x = bridge.make("x", std::vector<double>{1, 0});
  std::vector<Instance> pool{bridge.make("a", std::vector<double>{1, 0}),
                             bridge.make("b", std::vector<double>{1, 1})};
  const std::unordered_set<std::string> ex{"a"};
  const auto got = get_instances_pool(x, pool, 5, SimilaritySpace::kInterp, bridge, &ex);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].id(), "b");
  EXPECT_THROW(get_instances_pool(x, std::span<const Instance>{}, 1, SimilaritySpace::kInterp, bridge),
               EmptyPoolError);
}

TEST(GenerativeTest, KeepAllReproducesInstance) {
  const DenseBridge bridge = DenseBridge::random(6, 5, 2);
  const Instance x = bridge.make("x", std::vector<double>{1, 0, 2, 0.5, 0});
  for (const auto& g : get_instances_generative(x, bridge, 10, 1.0, 3)) {
    EXPECT_EQ(g.x(), x.x());
    EXPECT_EQ(g.x_interp(), x.x_interp());
  }
}

TEST(GenerativeTest, DeterministicAndSubsetOfPresentFeatures) {
  const DenseBridge bridge = DenseBridge::random(6, 8, 4);
  const Instance x = bridge.make("x", std::vector<double>{1, 0, 2, 0.5, 0, 0.1, 0.3, 0});
  const auto a = get_instances_generative(x, bridge, 200, 0.5, 9);
  const auto b = get_instances_generative(x, bridge, 200, 0.5, 9);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id(), b[i].id());
    EXPECT_EQ(a[i].x(), b[i].x());
    for (const auto& [j, v] : a[i].x_interp().entries()) {
      ASSERT_TRUE(x.x_interp().present(j));
      ASSERT_EQ(v, x.x_interp().activation(j));
    }
    EXPECT_EQ(bridge.h_prime(a[i].x()), a[i].x_interp());
  }
}

// Opaque vector = first two interpretable coordinates.
DenseBridge projector() { return DenseBridge({{1, 0, 0}, {0, 1, 0}}); }

TEST(CentroidTest, ArithmeticMean) {
  const DenseBridge bridge = projector();
  std::vector<Instance> pool{bridge.make("d1", std::vector<double>{1, 0, 1}),
                             bridge.make("d2", std::vector<double>{0, 1, 1}),
                             bridge.make("d3", std::vector<double>{2, 2, 1})};
  const PseudoExample pe = centroid_pseudoexample(pool, 2, 1, 100, 0.7);
  EXPECT_EQ(pe.x, OpaqueVec({1.0, 1.0}));
  EXPECT_EQ(pe.label, 1);
  EXPECT_EQ(pe.weight, 0.7);
  EXPECT_EQ(pe.provenance, Provenance::kCentroid);
  EXPECT_EQ(pe.source_feature, 2u);
}

TEST(CentroidTest, PoolTopSelectsHighestActivations) {
  const DenseBridge bridge = projector();
  std::vector<Instance> pool{bridge.make("doc3", std::vector<double>{0, 4, 0.1}),
                             bridge.make("doc1", std::vector<double>{2, 0, 0.9}),
                             bridge.make("doc2", std::vector<double>{0, 2, 0.5})};
  const PseudoExample pe = centroid_pseudoexample(pool, 2, -1, 2, 1.0);
  EXPECT_EQ(pe.x, OpaqueVec({1.0, 1.0}));  // mean of doc1 and doc2
  EXPECT_NEAR(pe.x_interp.activation(2), 0.7, 1e-15);
}

TEST(CentroidTest, AbsentFeatureUnsupported) {
  const DenseBridge bridge = projector();
  std::vector<Instance> pool{bridge.make("d1", std::vector<double>{1, 0, 0})};
  try {
    centroid_pseudoexample(pool, 2, 1, 10, 1.0);
    FAIL() << "expected FeatureUnsupportedError";
  } catch (const FeatureUnsupportedError& e) {
    EXPECT_STREQ(e.what(), "term not present in corpus pool");
  }
}

TEST(CentroidTest, SplitsIntoContiguousGroups) {
  const DenseBridge bridge = projector();
  std::vector<Instance> pool;
  for (int i = 0; i < 6; ++i) {
    pool.push_back(bridge.make("d" + std::to_string(i), std::vector<double>{double(i), 1, 6.0 - i}));
  }
  const auto pes = centroid_pseudoexamples(pool, 2, 1, 6, 3, 1.0);
  ASSERT_EQ(pes.size(), 3u);
  EXPECT_EQ(pes[0].x, OpaqueVec({0.5, 1.0}));
  EXPECT_EQ(pes[1].x, OpaqueVec({2.5, 1.0}));
  EXPECT_EQ(pes[2].x, OpaqueVec({4.5, 1.0}));
}

TEST(AdviceActionTest, ValidatesPolarity) {
  EXPECT_THROW(AdviceAction(1, 0), ValueError);
  EXPECT_THROW(AdviceAction(1, 2), ValueError);
  EXPECT_NO_THROW(AdviceAction(1, -1));
}

struct SmallWorld {
  DenseBridge bridge = DenseBridge::random(6, 5, 11);
  Dataset data;
  Instance anchor = bridge.make("anchor", std::vector<double>{1, 1, 0, 0, 0.5});
  ModelParams params;

  SmallWorld() {
    std::vector<Instance> pool;
    Rng rng(12);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> d(5);
      for (auto& v : d) v = rng.bernoulli(0.5) ? 0.2 + rng.uniform() : 0.0;
      d[3] = 0.0;  // feature 3 never occurs in the pool
      pool.push_back(bridge.make("p" + std::to_string(i), d));
    }
    data = Dataset(share(std::move(pool)));
    data.labeled.emplace_back(bridge.map(InterpVec::from_dense(std::vector<double>{1, 0, 0, 1, 0})), 1);
    data.labeled.emplace_back(bridge.map(InterpVec::from_dense(std::vector<double>{0, 0, 1, 0, 1})), -1);
    params = LogisticModel{}.fit(data.labeled, TrainConfig{});
  }
};

TEST(LimeadeUpdate, NoCandidateIsNoOp) {
  SmallWorld w;
  const auto before = w.data.labeled.size();
  const UpdateReport r =
      limeade_update(LogisticModel{}, w.params, w.data, &w.anchor, AdviceAction(3, 1),
                     PoolNearest{10, SimilaritySpace::kInterp}, w.bridge, ProximityKernel(), 0.25,
                     TrainConfig{});
  EXPECT_EQ(r.retained_count, 0);
  EXPECT_EQ(r.discarded_count, 10);
  EXPECT_TRUE(r.new_params == w.params);
  EXPECT_EQ(w.data.labeled.size(), before);
  EXPECT_TRUE(r.added_examples.empty());
}

TEST(LimeadeUpdate, CentroidNeedsNoAnchorAndReportsUnsupported) {
  SmallWorld w;
  const UpdateReport r = limeade_update(LogisticModel{}, w.params, w.data, nullptr, AdviceAction(0, 1),
                                        CentroidTopActivation{5, 1}, w.bridge, ProximityKernel(),
                                        1.0, TrainConfig{});
  EXPECT_EQ(r.retained_count, 1);
  EXPECT_EQ(r.added_examples[0].weight, 1.0);
  EXPECT_THROW(limeade_update(LogisticModel{}, w.params, w.data, nullptr, AdviceAction(3, 1),
                              CentroidTopActivation{5, 1}, w.bridge, ProximityKernel(), 1.0,
                              TrainConfig{}),
               FeatureUnsupportedError);
  EXPECT_THROW(limeade_update(LogisticModel{}, w.params, w.data, nullptr, AdviceAction(0, 1),
                              PoolNearest{}, w.bridge, ProximityKernel(), 1.0, TrainConfig{}),
               ValueError);
}

TEST(LimeadeUpdate, StrategyDefaults) {
  EXPECT_EQ(PoolNearest{}.k, 50);
  EXPECT_EQ(CentroidTopActivation{}.pool_top, 100);
  EXPECT_EQ(CentroidTopActivation{}.k, 1);
  EXPECT_THROW(validate(GetInstanceStrategy{PoolNearest{0}}), ValueError);
  EXPECT_THROW(validate(GetInstanceStrategy{GenerativeMask{5, 1.5}}), ValueError);
}

// Retention, label and weight soundness after every update, plus purity and
// no-op safety, over random strategies and actions.
TEST(LimeadeUpdate, SoundnessProperties) {
  const LogisticModel model;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SmallWorld w;
    Rng rng(seed);
    ModelParams params = w.params;
    for (int step = 0; step < 4; ++step) {
      const FeatureIndex j = static_cast<FeatureIndex>(rng.below(5));
      const int a = rng.bernoulli(0.5) ? 1 : -1;
      const double aw = 0.05 + rng.uniform();
      GetInstanceStrategy strategy;
      switch (rng.below(3)) {
        case 0: strategy = PoolNearest{1 + static_cast<int>(rng.below(20)), SimilaritySpace::kInterp}; break;
        case 1: strategy = GenerativeMask{1 + static_cast<int>(rng.below(20)), 0.5}; break;
        default: strategy = CentroidTopActivation{1 + static_cast<int>(rng.below(20)), 2}; break;
      }
      const auto labeled_before = w.data.labeled.size();
      UpdateReport r;
      Dataset replay = w.data;
      try {
        r = limeade_update(model, params, w.data, &w.anchor, AdviceAction(j, a), strategy, w.bridge,
                           ProximityKernel(), aw, TrainConfig{}, derive_seed(seed, step));
      } catch (const FeatureUnsupportedError&) {
        EXPECT_EQ(w.data.labeled.size(), labeled_before);
        continue;
      }
      for (const auto& pe : r.added_examples) {
        ASSERT_GT(pe.x_interp.activation(j), 0.0);
        ASSERT_EQ(pe.label, a);
        ASSERT_GT(pe.weight, 0.0);
        ASSERT_LE(pe.weight, aw);
        ASSERT_EQ(pe.source_feature, j);
      }
      ASSERT_EQ(static_cast<int>(r.added_examples.size()), r.retained_count);
      if (r.retained_count == 0) {
        ASSERT_TRUE(r.new_params == params);
        ASSERT_EQ(w.data.labeled.size(), labeled_before);
      } else {
        ASSERT_EQ(w.data.labeled.size(), labeled_before + r.retained_count);
      }
      // Purity: the same inputs give bit-identical parameters.
      const UpdateReport again =
          limeade_update(model, params, replay, &w.anchor, AdviceAction(j, a), strategy, w.bridge,
                         ProximityKernel(), aw, TrainConfig{}, derive_seed(seed, step));
      ASSERT_TRUE(again.new_params == r.new_params);
      params = r.new_params;
    }
  }
}

TEST(LimeadeUpdate, KernelWeightsFollowDistance) {
  SmallWorld w;
  const ProximityKernel kernel(0.75);
  const auto c = collect_pseudo_examples(w.data, &w.anchor, AdviceAction(0, 1),
                                         PoolNearest{40, SimilaritySpace::kInterp}, w.bridge,
                                         kernel, 0.25, 0);
  ASSERT_FALSE(c.retained.empty());
  for (const auto& pe : c.retained) {
    const double d = interp_distance(pe.x_interp, w.anchor.x_interp());
    EXPECT_DOUBLE_EQ(pe.weight, 0.25 * kernel_weight(d, kernel));
    EXPECT_EQ(pe.provenance, Provenance::kSampled);
  }
  EXPECT_EQ(static_cast<int>(c.retained.size()) + c.discarded, 40);
}

TEST(LimeadeUpdate, ReportSerializes) {
  SmallWorld w;
  const UpdateReport r = limeade_update(LogisticModel{}, w.params, w.data, nullptr, AdviceAction(1, -1),
                                        CentroidTopActivation{3, 1}, w.bridge, ProximityKernel(),
                                        0.5, TrainConfig{});
  const nlohmann::json j = r;
  EXPECT_EQ(j["retained_count"], 1);
  EXPECT_EQ(j["added_examples"][0]["provenance"], "centroid");
  EXPECT_EQ(j["added_examples"][0]["label"], -1);
}

TEST(SimulateAdvice, PositiveCaseLowestTruthIndex) {
  const std::vector<FeatureIndex> truth{7, 3};
  const AdviceAction a = simulate_advice_for_instance(truth, {}, AdviceCase::kFalseNegative);
  EXPECT_EQ(a.feature, 3u);
  EXPECT_EQ(a.polarity, 1);
}

TEST(SimulateAdvice, NegativeCaseArgmaxOutsideTruth) {
  const std::vector<FeatureIndex> truth{2};
  const std::vector<Contribution> expl{{5, 0.9}, {2, -0.4}};
  const AdviceAction a = simulate_advice_for_instance(truth, expl, AdviceCase::kFalsePositive);
  EXPECT_EQ(a.feature, 5u);
  EXPECT_EQ(a.polarity, -1);
}

TEST(SimulateAdvice, DegenerateCases) {
  EXPECT_THROW(simulate_advice_for_instance({}, {}, AdviceCase::kFalseNegative), NoAdviceAvailable);
  const std::vector<FeatureIndex> truth{2};
  const std::vector<Contribution> only_truth{{2, 0.4}};
  EXPECT_THROW(simulate_advice_for_instance(truth, only_truth, AdviceCase::kFalsePositive),
               NoAdviceAvailable);
  const std::vector<Contribution> tie{{9, -0.5}, {4, 0.5}};
  EXPECT_EQ(simulate_advice_for_instance(truth, tie, AdviceCase::kFalsePositive).feature, 4u);
}

// Positive advice on an object part raises the model's mean score on held-out
// pool instances containing that part, averaged over 100 seeded domains.
TEST(LimeadeUpdate, PositiveAdviceRaisesScoresOfFeatureHolders) {
  synthetic::SyntheticDomainSpec base;
  base.pool_size = 300;
  base.test_per_class = 5;
  const LogisticModel model;
  const TrainConfig cfg{1.0, 300, 1e-3, 0, StepRule::kCurvatureScaled};
  double total_gain = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = synthetic::class_spec(base, derive_seed(1, seed));
    const auto dom = synthetic::gen_synthetic_domain(spec, derive_seed(2, seed));
    const auto pool = dom.data.pool_view();
    std::size_t pos = 0, neg = 0;
    while (dom.pool_labels[pos] != 1) ++pos;
    while (dom.pool_labels[neg] != -1) ++neg;
    Dataset data(dom.data.pool, {WeightedExample(pool[pos].x(), 1), WeightedExample(pool[neg].x(), -1)});
    data.consumed = {pool[pos].id(), pool[neg].id()};
    const ModelParams p0 = model.fit(data.labeled, cfg);
    const FeatureIndex j = spec.object_parts.front();
    const UpdateReport r = limeade_update(model, p0, data, &pool[pos], AdviceAction(j, 1),
                                          PoolNearest{50, SimilaritySpace::kInterp}, *dom.bridge,
                                          ProximityKernel(), 0.25, cfg);
    std::set<std::string> used;
    for (const auto& pe : r.added_examples) used.insert(pe.source_id);
    double before = 0, after = 0;
    int n = 0;
    for (const auto& inst : pool) {
      if (!inst.x_interp().present(j) || used.count(inst.id()) || data.consumed.count(inst.id())) continue;
      before += score(p0, inst.x());
      after += score(r.new_params, inst.x());
      ++n;
    }
    if (n == 0) continue;
    total_gain += (after - before) / n;
    ++runs;
  }
  ASSERT_GT(runs, 90);
  EXPECT_GT(total_gain / runs, 0.0);
}

}  // namespace
}  // namespace steer
