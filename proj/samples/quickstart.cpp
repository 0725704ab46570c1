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

// Train on two examples, explain one of them, give feature advice and
// retrain.

#include <iostream>

#include "steer/advice.hpp"
#include "steer/explain.hpp"
#include "steer/models.hpp"
#include "steer/synthetic.hpp"

int main() {
  using namespace steer;
  synthetic::SyntheticDomainSpec base;
  base.pool_size = 500;
  base.test_per_class = 200;
  const auto spec = synthetic::class_spec(base, 1);
  const auto dom = synthetic::gen_synthetic_domain(spec, 11);

  // One positive and one negative labeled example.
  std::size_t pos = 0, neg = 0;
  while (dom.pool_labels[pos] != 1) ++pos;
  while (dom.pool_labels[neg] != -1) ++neg;
  const auto& pool = dom.data.pool_view();
  Dataset data(dom.data.pool, {WeightedExample(pool[pos].x(), 1, 1.0),
                               WeightedExample(pool[neg].x(), -1, 1.0)});
  data.consumed = {pool[pos].id(), pool[neg].id()};

  const LogisticModel model;
  const TrainConfig cfg{1.0, 500, 1e-3, 0, StepRule::kCurvatureScaled};
  ModelParams params = model.fit(data.labeled, cfg);

  auto accuracy = [&](const ModelParams& p) {
    int ok = 0;
    for (std::size_t i = 0; i < dom.test.size(); ++i) {
      ok += predict_label(score(p, dom.test[i].x())) == dom.test_labels[i];
    }
    return static_cast<double>(ok) / static_cast<double>(dom.test.size());
  };
  std::cout << "accuracy before advice: " << accuracy(params) << '\n';

  // Endorse an object part of the positive example; reject the strongest
  // non-object part in the negative example's explanation.
  const ProximityKernel kernel;
  const Surrogate g =
      fit_local_surrogate(model, params, pool[neg], *dom.bridge, 256, kernel, 1e-2, 3);
  const auto contribs = contributions(g, pool[neg].x_interp());
  const auto shown = select_display_terms(contribs, 4, kGreedy, 0,
                                          [](FeatureIndex j) { return std::to_string(j); });
  std::cout << "negative example explained by parts:";
  for (const auto& t : shown.terms) std::cout << ' ' << t.feature << '(' << t.value << ')';
  std::cout << '\n';

  const auto truth = dom.truth(pos);
  const AdviceAction up = simulate_advice_for_instance(truth, {}, AdviceCase::kFalseNegative);
  const AdviceAction down =
      simulate_advice_for_instance(truth, contribs, AdviceCase::kFalsePositive);
  const PoolNearest nearest{50, SimilaritySpace::kInterp};
  CollectedAdvice all = collect_pseudo_examples(data, &pool[pos], up, nearest, *dom.bridge,
                                                kernel, 0.25, 0);
  CollectedAdvice more = collect_pseudo_examples(data, &pool[neg], down, nearest, *dom.bridge,
                                                 kernel, 0.25, 0);
  all.retained.insert(all.retained.end(), more.retained.begin(), more.retained.end());
  all.discarded += more.discarded;
  const UpdateReport r = apply_pseudo_examples(model, params, data, std::move(all), cfg);
  std::cout << "advice +" << up.feature << " -" << down.feature << ": " << r.retained_count
            << " pseudo-examples kept, " << r.discarded_count << " discarded\n";
  std::cout << "accuracy after advice: " << accuracy(r.new_params) << '\n';
  return 0;
}
