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

// Seeded experiment runners for the three desk-scale studies: advice vs.
// extra labels on a synthetic part-based classifier, feed ranking with term
// annotations, and the unique-term decay of greedy vs. sampled explanation
// display.

#ifndef STEER_HARNESS_HPP_
#define STEER_HARNESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/advice.hpp"
#include "steer/core.hpp"
#include "steer/explain.hpp"
#include "steer/metrics.hpp"
#include "steer/models.hpp"
#include "steer/random.hpp"
#include "steer/synthetic.hpp"
#include "steer/textcorpus.hpp"

namespace steer::harness {

struct ResultRow {
  std::string study;
  std::string group;  // class or feed/session id
  std::uint64_t seed = 0;
  std::string arm;
  int step = 0;  // training size (feed-sim) or actions taken (tradeoff)
  std::string metric;
  double value = 0.0;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "study,group,seed,arm,step,metric,value\n";
  for (const auto& r : rows) {
    out << r.study << ',' << r.group << ',' << r.seed << ',' << r.arm << ',' << r.step << ','
        << r.metric << ',' << format_double(r.value) << '\n';
  }
}

inline void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValueError("cannot write '" + path + "'");
  write_csv(out, rows);
}

struct StudyResult {
  std::vector<ResultRow> rows;
  nlohmann::json summary;
  int skipped = 0;
};

namespace detail {

inline std::string group_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, i);
  return buf;
}

inline nlohmann::json ttest_json(std::span<const double> a, std::span<const double> b) {
  try {
    const auto r = metrics::paired_t_test(a, b);
    return {{"t", r.t}, {"p", r.p_two_sided}, {"n", r.n}, {"mean_difference", r.mean_difference}};
  } catch (const DegenerateTest&) {
    return {{"t", nullptr}, {"p", nullptr}, {"n", a.size()}, {"degenerate", true}};
  } catch (const ValueError&) {
    return {{"t", nullptr}, {"p", nullptr}, {"n", a.size()}};
  }
}

inline TrainConfig scaled(TrainConfig cfg) {
  cfg.step_rule = StepRule::kCurvatureScaled;
  return cfg;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Image-study analog

// Per-run state handed to ImageStudyConfig::observer.
struct ImageRunTrace {
  int class_index = 0;
  int seed = 0;
  std::vector<WeightedExample> initial;
  ModelParams baseline_start;
  ModelParams limeade_start;
  ModelParams baseline_after;
  ModelParams limeade_after;
  int retained = 0;
};

struct ImageStudyConfig {
  int classes = 20;
  int seeds = 100;
  int shots = 1;  // per label; 1 gives the 2-shot setting
  int neighbors = 50;
  double advice_weight = 0.25;  // 0 disables pseudo-examples
  SimilaritySpace similarity = SimilaritySpace::kInterp;
  bool combined_arm = false;
  int lime_samples = 256;
  double sigma = 0.75;
  double lime_ridge = 1e-2;
  TrainConfig train{1.0, 500, 1e-3, 0, StepRule::kCurvatureScaled};
  synthetic::SyntheticDomainSpec domain;
  std::uint64_t master_seed = 7;
  std::function<void(const ImageRunTrace&)> observer;  // called once per completed run
};

inline double test_accuracy(const ModelParams& p, const synthetic::SyntheticDomain& dom) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < dom.test.size(); ++i) {
    ok += predict_label(score(p, dom.test[i].x())) == dom.test_labels[i];
  }
  return static_cast<double>(ok) / static_cast<double>(dom.test.size());
}

inline StudyResult run_image_study(const ImageStudyConfig& cfg) {
  if (cfg.seeds < 2) throw ValueError("image-study: need at least 2 seeds");
  if (cfg.shots < 1) throw ValueError("image-study: shots must be >= 1");
  const LogisticModel model;
  const ProximityKernel kernel(cfg.sigma);
  StudyResult result;
  nlohmann::json table = nlohmann::json::array();
  std::vector<double> all_base, all_lime, class_p;
  std::vector<std::size_t> class_p_index;

  for (int c = 0; c < cfg.classes; ++c) {
    const std::string group = detail::group_name("class", c);
    const auto spec =
        synthetic::class_spec(cfg.domain, derive_seed(cfg.master_seed, 0xC1A55, c));
    const auto dom = synthetic::gen_synthetic_domain(spec, derive_seed(cfg.master_seed, 0xD0, c));
    const auto& pool = *dom.data.pool;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < pool.size(); ++i) (dom.pool_labels[i] > 0 ? pos : neg).push_back(i);
    const auto need = static_cast<std::size_t>(cfg.shots + 1);
    if (pos.size() < need || neg.size() < need) throw ValueError("image-study: pool too small");

    std::vector<double> acc0s, dbase, dlime;
    for (int r = 0; r < cfg.seeds; ++r) {
      const std::uint64_t run_seed = derive_seed(cfg.master_seed, c, r);
      Rng rng(run_seed);
      auto draw = [&](std::vector<std::size_t>& from, std::size_t n) {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t pick = k + rng.below(from.size() - k);
          std::swap(from[k], from[pick]);
          out.push_back(from[k]);
        }
        return out;
      };
      const auto pos_draw = draw(pos, need);
      const auto neg_draw = draw(neg, need);

      std::vector<WeightedExample> initial;
      std::unordered_set<std::string> consumed;
      for (int s = 0; s < cfg.shots; ++s) {
        for (std::size_t idx : {pos_draw[s], neg_draw[s]}) {
          initial.emplace_back(pool[idx].x(), dom.pool_labels[idx], 1.0);
          consumed.insert(pool[idx].id());
        }
      }
      const Instance& upd_pos = pool[pos_draw.back()];
      const Instance& upd_neg = pool[neg_draw.back()];
      consumed.insert(upd_pos.id());
      consumed.insert(upd_neg.id());

      const ModelParams params0 = model.fit(initial, cfg.train);
      const double acc0 = test_accuracy(params0, dom);

      // Baseline: one more labeled example of each class.
      std::vector<WeightedExample> base_set = initial;
      base_set.emplace_back(upd_pos.x(), 1, 1.0);
      base_set.emplace_back(upd_neg.x(), -1, 1.0);
      const ModelParams params_base = model.fit(base_set, cfg.train);
      const double acc_base = test_accuracy(params_base, dom);
      ImageRunTrace trace;

      // Advice: +1 on an object part of the positive, -1 on the strongest
      // non-object part of the negative's local explanation.
      double acc_lime = acc0;
      try {
        const auto truth = dom.spec.object_parts;
        const AdviceAction pos_action =
            simulate_advice_for_instance(truth, {}, AdviceCase::kFalseNegative);
        const Surrogate g = fit_local_surrogate(model, params0, upd_neg, *dom.bridge,
                                                cfg.lime_samples, kernel, cfg.lime_ridge,
                                                derive_seed(run_seed, 1));
        const auto contribs = contributions(g, upd_neg.x_interp());
        const AdviceAction neg_action =
            simulate_advice_for_instance(truth, contribs, AdviceCase::kFalsePositive);

        Dataset data(dom.data.pool, initial);
        data.consumed = consumed;
        if (cfg.combined_arm) {
          data.labeled.emplace_back(upd_pos.x(), 1, 1.0);
          data.labeled.emplace_back(upd_neg.x(), -1, 1.0);
        }
        CollectedAdvice collected;
        if (cfg.advice_weight > 0.0) {
          const GetInstanceStrategy strategy = PoolNearest{cfg.neighbors, cfg.similarity};
          collected = collect_pseudo_examples(data, &upd_pos, pos_action, strategy, *dom.bridge,
                                              kernel, cfg.advice_weight);
          auto more = collect_pseudo_examples(data, &upd_neg, neg_action, strategy, *dom.bridge,
                                              kernel, cfg.advice_weight);
          collected.discarded += more.discarded;
          for (auto& pe : more.retained) collected.retained.push_back(std::move(pe));
        }
        ModelParams params_t = params0;
        if (cfg.combined_arm && collected.retained.empty()) {
          params_t = model.fit(data.labeled, cfg.train);
        }
        const UpdateReport rep =
            apply_pseudo_examples(model, params_t, data, std::move(collected), cfg.train);
        acc_lime = test_accuracy(rep.new_params, dom);
        if (cfg.observer) {
          trace.limeade_start = params_t;
          trace.limeade_after = rep.new_params;
          trace.retained = rep.retained_count;
        }
        result.rows.push_back({"image", group, static_cast<std::uint64_t>(r), "limeade", 0,
                               "retained", static_cast<double>(rep.retained_count)});
      } catch (const NoAdviceAvailable&) {
        ++result.skipped;
        continue;
      }
      result.rows.push_back({"image", group, static_cast<std::uint64_t>(r), "initial", 0,
                             "accuracy_2shot", acc0});
      result.rows.push_back({"image", group, static_cast<std::uint64_t>(r), "baseline", 0,
                             "delta_accuracy", acc_base - acc0});
      result.rows.push_back({"image", group, static_cast<std::uint64_t>(r), "limeade", 0,
                             "delta_accuracy", acc_lime - acc0});
      if (cfg.observer) {
        trace.class_index = c;
        trace.seed = r;
        trace.initial = initial;
        trace.baseline_start = params0;
        trace.baseline_after = params_base;
        cfg.observer(trace);
      }
      acc0s.push_back(acc0);
      dbase.push_back(acc_base - acc0);
      dlime.push_back(acc_lime - acc0);
    }
    nlohmann::json t = detail::ttest_json(dlime, dbase);
    const double mb = metrics::mean(dbase), ml = metrics::mean(dlime);
    table.push_back({{"class", group},
                     {"two_shot_accuracy", metrics::mean(acc0s)},
                     {"delta_baseline", mb},
                     {"delta_baseline_se", metrics::standard_error(dbase)},
                     {"delta_limeade", ml},
                     {"delta_limeade_se", metrics::standard_error(dlime)},
                     {"p_value", t["p"]},
                     {"winner", ml > mb ? "limeade" : (mb > ml ? "baseline" : "tie")},
                     {"runs", dbase.size()}});
    if (t["p"].is_number()) {
      class_p.push_back(t["p"].get<double>());
      class_p_index.push_back(table.size() - 1);
    }
    all_base.insert(all_base.end(), dbase.begin(), dbase.end());
    all_lime.insert(all_lime.end(), dlime.begin(), dlime.end());
  }
  const auto adjusted = metrics::holm_bonferroni(class_p);
  for (std::size_t i = 0; i < adjusted.size(); ++i) table[class_p_index[i]]["p_adjusted"] = adjusted[i];
  result.summary = {{"study", "image"},
                    {"arm_means", {{"baseline", metrics::mean(all_base)},
                                   {"limeade", metrics::mean(all_lime)}}},
                    {"aggregate", detail::ttest_json(all_lime, all_base)},
                    {"table", std::move(table)},
                    {"skipped", result.skipped}};
  return result;
}


// ---------------------------------------------------------------------------
// Shared text-domain setup

struct TextDomain {
  synthetic::SyntheticCorpus synth;
  std::shared_ptr<const text::Corpus> corpus;
  std::vector<std::string> stems;  // per vocabulary term
};

inline TextDomain make_text_domain(const synthetic::SyntheticCorpusSpec& spec,
                                   const text::CorpusOptions& opt, std::uint64_t seed) {
  TextDomain d;
  d.synth = synthetic::gen_synthetic_corpus(spec, seed);
  d.corpus = std::make_shared<const text::Corpus>(d.synth.docs, opt);
  d.stems.reserve(d.corpus->vocab().size());
  for (const auto& t : d.corpus->vocab().terms()) d.stems.push_back(stem(t));
  return d;
}

// Unigram vocabulary terms of one topic, most frequent first.
inline std::vector<FeatureIndex> topic_terms(const TextDomain& d, std::size_t topic) {
  std::unordered_set<std::string> words(d.synth.topic_words[topic].begin(),
                                        d.synth.topic_words[topic].end());
  std::vector<FeatureIndex> out;
  const auto& vocab = d.corpus->vocab();
  for (FeatureIndex j = 0; j < vocab.size(); ++j) {
    if (words.count(vocab.term(j))) out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feed-ranking simulation

struct FeedSimConfig {
  int feeds = 30;
  std::vector<int> sizes{2, 5, 10};
  int samples_per_size = 10;
  int rated_relevant = 40;
  int rated_irrelevant = 20;
  int positive_annotations = 3;
  int negative_annotations = 1;
  int annotation_candidates = 10;  // annotated terms come from a topic's top terms
  int negatives_per_label = 1;     // random corpus negatives per labeled paper
  double advice_weight = 1.0;
  int pool_top = 100;
  bool uniform_oracle = false;  // every paper equally relevant
  synthetic::SyntheticCorpusSpec corpus;
  text::CorpusOptions text{600, 64, 17};
  TrainConfig train{1.0, 500, 1e-3, 0, StepRule::kCurvatureScaled};
  std::uint64_t master_seed = 7;
  std::string rankings_out;  // optional JSONL dump of every evaluated ranking
};

inline StudyResult run_feed_simulation(const FeedSimConfig& cfg) {
  if (cfg.feeds < 1 || cfg.sizes.empty()) throw ValueError("feed-sim: need feeds and sizes");
  const HingeRanker model;
  const ProximityKernel kernel;
  const TextDomain dom = make_text_domain(cfg.corpus, cfg.text, derive_seed(cfg.master_seed, 0xF0));
  const auto& corpus = *dom.corpus;
  const auto& instances = *corpus.instances();
  const std::size_t n_docs = corpus.size();
  const std::size_t n_topics = dom.synth.topic_words.size();

  std::ofstream dump;
  if (!cfg.rankings_out.empty()) {
    dump.open(cfg.rankings_out, std::ios::binary);
    if (!dump) throw ValueError("cannot write '" + cfg.rankings_out + "'");
  }

  StudyResult result;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_size;  // base, lime
  for (int f = 0; f < cfg.feeds; ++f) {
    const std::string group = detail::group_name("feed", f);
    Rng rng(derive_seed(cfg.master_seed, 0xFEED, f));
    const std::size_t topic = rng.below(n_topics);
    const synthetic::TermOracle oracle(dom.synth, {topic});
    auto relevance = [&](std::size_t d) {
      return cfg.uniform_oracle ? 1.0 : oracle.relevance(dom.synth, d);
    };

    // Rated papers: a mix of on-topic and off-topic documents.
    std::vector<std::size_t> on, off;
    for (std::size_t d = 0; d < n_docs; ++d) (oracle.relevance(dom.synth, d) >= 0.5 ? on : off).push_back(d);
    rng.shuffle(on.begin(), on.end());
    rng.shuffle(off.begin(), off.end());
    std::vector<std::size_t> rated(on.begin(), on.begin() + std::min<std::ptrdiff_t>(cfg.rated_relevant, on.size()));
    rated.insert(rated.end(), off.begin(), off.begin() + std::min<std::ptrdiff_t>(cfg.rated_irrelevant, off.size()));
    std::sort(rated.begin(), rated.end());
    const std::unordered_set<std::size_t> rated_set(rated.begin(), rated.end());

    // Term annotations: thumbs-up on preferred-topic terms, thumbs-down on a
    // term of some other topic.
    std::vector<AdviceAction> annotations;
    auto pick_terms = [&](std::size_t t, int count, int polarity) {
      auto terms = topic_terms(dom, t);
      if (terms.size() > static_cast<std::size_t>(cfg.annotation_candidates)) {
        terms.resize(static_cast<std::size_t>(cfg.annotation_candidates));
      }
      rng.shuffle(terms.begin(), terms.end());
      for (int i = 0; i < count && i < static_cast<int>(terms.size()); ++i) {
        annotations.emplace_back(terms[static_cast<std::size_t>(i)], polarity);
      }
    };
    pick_terms(topic, cfg.positive_annotations, 1);
    if (cfg.negative_annotations > 0) {
      std::size_t other = rng.below(n_topics - 1);
      if (other >= topic) ++other;
      pick_terms(other, cfg.negative_annotations, -1);
    }

    for (int size : cfg.sizes) {
      if (size < 1 || static_cast<std::size_t>(size) >= rated.size()) {
        throw ValueError("feed-sim: training size must be in [1, rated papers)");
      }
      std::vector<double> base_scores, lime_scores;
      for (int s = 0; s < cfg.samples_per_size; ++s) {
        Rng srng(derive_seed(cfg.master_seed, f, size, s));
        std::vector<std::size_t> train;
        bool has_positive = false;
        for (int attempt = 0; attempt < 50 && !has_positive; ++attempt) {
          std::vector<std::size_t> shuffled = rated;
          srng.shuffle(shuffled.begin(), shuffled.end());
          train.assign(shuffled.begin(), shuffled.begin() + size);
          for (std::size_t d : train) has_positive |= relevance(d) >= 0.5;
        }
        if (!has_positive) {
          ++result.skipped;
          continue;
        }
        const std::unordered_set<std::size_t> train_set(train.begin(), train.end());
        std::vector<WeightedExample> labeled;
        for (std::size_t d : train) labeled.emplace_back(instances[d].x(), relevance(d) >= 0.5 ? 1 : -1, 1.0);
        const std::size_t n_neg = static_cast<std::size_t>(size * cfg.negatives_per_label);
        std::unordered_set<std::size_t> drawn;
        while (drawn.size() < n_neg) {
          const std::size_t d = srng.below(n_docs);
          if (rated_set.count(d) || !drawn.insert(d).second) continue;
          labeled.emplace_back(instances[d].x(), -1, 1.0);
        }

        const ModelParams base_params = model.fit(labeled, cfg.train);
        Dataset data(corpus.instances(), labeled);
        ModelParams lime_params = base_params;
        for (const auto& action : annotations) {
          lime_params = limeade_update(model, lime_params, data, nullptr, action,
                                       CentroidTopActivation{cfg.pool_top, 1}, corpus.bridge(),
                                       kernel, cfg.advice_weight, cfg.train)
                            .new_params;
        }

        std::vector<std::size_t> held;
        for (std::size_t d : rated) {
          if (!train_set.count(d)) held.push_back(d);
        }
        auto evaluate = [&](const ModelParams& p, const char* arm) {
          std::vector<std::pair<double, std::size_t>> ranked;
          for (std::size_t d : held) ranked.emplace_back(model.score(p, instances[d].x()), d);
          std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first
                                      : corpus.docs()[a.second].id < corpus.docs()[b.second].id;
          });
          std::vector<double> rel;
          for (const auto& [sc, d] : ranked) rel.push_back(relevance(d));
          const double v = metrics::ndcg(rel);
          if (dump.is_open()) {
            nlohmann::json j = {{"feed", group}, {"size", size}, {"sample", s},
                                {"arm", arm},    {"relevance", rel}, {"ndcg", v}};
            dump << j.dump() << '\n';
          }
          result.rows.push_back({"feed", group, static_cast<std::uint64_t>(s), arm, size, "ndcg", v});
          return v;
        };
        base_scores.push_back(evaluate(base_params, "baseline"));
        lime_scores.push_back(evaluate(lime_params, "limeade"));
      }
      if (base_scores.empty()) continue;
      const double mb = metrics::mean(base_scores), ml = metrics::mean(lime_scores);
      result.rows.push_back({"feed", group, 0, "baseline", size, "ndcg_mean", mb});
      result.rows.push_back({"feed", group, 0, "limeade", size, "ndcg_mean", ml});
      by_size[size].first.push_back(mb);
      by_size[size].second.push_back(ml);
    }
  }

  nlohmann::json per_size = nlohmann::json::array();
  std::vector<double> all_base, all_lime, size_p;
  std::vector<std::size_t> size_p_index;
  for (const auto& [size, arms] : by_size) {
    nlohmann::json t = detail::ttest_json(arms.second, arms.first);
    per_size.push_back({{"size", size},
                        {"baseline", metrics::mean(arms.first)},
                        {"limeade", metrics::mean(arms.second)},
                        {"t", t["t"]},
                        {"p", t["p"]},
                        {"feeds", arms.first.size()}});
    if (t["p"].is_number()) {
      size_p.push_back(t["p"].get<double>());
      size_p_index.push_back(per_size.size() - 1);
    }
    all_base.insert(all_base.end(), arms.first.begin(), arms.first.end());
    all_lime.insert(all_lime.end(), arms.second.begin(), arms.second.end());
  }
  const auto adjusted = metrics::holm_bonferroni(size_p);
  for (std::size_t i = 0; i < adjusted.size(); ++i) per_size[size_p_index[i]]["p_adjusted"] = adjusted[i];
  result.summary = {{"study", "feed"},
                    {"arm_means", {{"baseline", metrics::mean(all_base)},
                                   {"limeade", metrics::mean(all_lime)}}},
                    {"aggregate", detail::ttest_json(all_lime, all_base)},
                    {"table", std::move(per_size)},
                    {"skipped", result.skipped}};
  return result;
}

// ---------------------------------------------------------------------------
// Explanation-action tradeoff

struct TradeoffConfig {
  int sessions = 300;
  int actions = 20;
  double gamma = 4.0;  // diversity-biased policy; compared against greedy
  int top_papers = 8;
  int n_display = 4;
  int seed_papers = 3;
  double advice_weight = 1.0;
  int pool_top = 100;
  double surrogate_ridge = 0.1;
  synthetic::SyntheticCorpusSpec corpus;
  text::CorpusOptions text{600, 64, 17};
  TrainConfig train{1.0, 500, 1e-3, 0, StepRule::kCurvatureScaled};
  std::uint64_t master_seed = 7;
};

inline std::string policy_name(double gamma) {
  if (std::isinf(gamma)) return "greedy";
  char buf[32];
  std::snprintf(buf, sizeof buf, "gamma%g", gamma);
  return buf;
}

struct DisplayedPage {
  std::vector<std::size_t> docs;
  std::vector<Explanation> explanations;
  std::size_t unique_terms = 0;
};

// Top unrated papers under `params`, each explained by the global surrogate
// with the given display policy.
inline DisplayedPage display_top(const TextDomain& dom, const GlobalSurrogateFitter& fitter,
                                 const ModelParams& params,
                                 const std::unordered_set<std::size_t>& rated, int top, int n_display,
                                 double gamma, std::uint64_t seed) {
  const auto& instances = *dom.corpus->instances();
  std::vector<double> scores(instances.size());
  for (std::size_t d = 0; d < instances.size(); ++d) scores[d] = score(params, instances[d].x());
  const Surrogate g = fitter.fit(scores);
  std::vector<std::size_t> order;
  for (std::size_t d = 0; d < instances.size(); ++d) {
    if (!rated.count(d)) order.push_back(d);
  }
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(top), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  order.resize(take);
  DisplayedPage page;
  std::set<FeatureIndex> unique;
  const auto stem_of = [&](FeatureIndex j) { return dom.stems[j]; };
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t d = order[rank];
    const auto contribs = contributions(g, instances[d].x_interp());
    auto e = select_display_terms(contribs, n_display, gamma, derive_seed(seed, d), stem_of,
                                  instances[d].id());
    for (const auto& t : e.terms) unique.insert(t.feature);
    page.explanations.push_back(std::move(e));
  }
  page.docs = std::move(order);
  page.unique_terms = unique.size();
  return page;
}

inline StudyResult run_tradeoff_study(const TradeoffConfig& cfg) {
  if (cfg.sessions < 1 || cfg.actions < 1) throw ValueError("tradeoff: need sessions and actions");
  const HingeRanker model;
  const ProximityKernel kernel;
  const TextDomain dom = make_text_domain(cfg.corpus, cfg.text, derive_seed(cfg.master_seed, 0x7D));
  const auto& corpus = *dom.corpus;
  const auto& instances = *corpus.instances();
  const GlobalSurrogateFitter fitter(corpus.interp_rows(), cfg.surrogate_ridge);
  const std::size_t n_topics = dom.synth.topic_words.size();
  const double policies[] = {kGreedy, cfg.gamma};

  StudyResult result;
  std::map<std::string, std::vector<double>> slopes;
  for (int s = 0; s < cfg.sessions; ++s) {
    const std::string group = detail::group_name("session", s);
    const std::uint64_t session_seed = derive_seed(cfg.master_seed, 0x5E55, s);
    Rng rng(session_seed);
    const std::size_t topic = rng.below(n_topics);
    const synthetic::TermOracle oracle(dom.synth, {topic});
    std::vector<std::size_t> on;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      if (oracle.relevance(dom.synth, d) >= 0.5) on.push_back(d);
    }
    rng.shuffle(on.begin(), on.end());
    std::vector<WeightedExample> initial;
    std::unordered_set<std::size_t> rated;
    for (int i = 0; i < cfg.seed_papers && i < static_cast<int>(on.size()); ++i) {
      initial.emplace_back(instances[on[i]].x(), 1, 1.0);
      rated.insert(on[i]);
    }
    while (initial.size() < 2 * rated.size()) {
      const std::size_t d = rng.below(corpus.size());
      if (rated.count(d)) continue;
      initial.emplace_back(instances[d].x(), -1, 1.0);
    }
    const ModelParams params0 = model.fit(initial, cfg.train);

    for (double gamma : policies) {
      const std::string arm = policy_name(gamma);
      Dataset data(corpus.instances(), initial);
      ModelParams params = params0;
      std::set<FeatureIndex> acted;
      std::vector<double> xs, ys;
      int taken = 0;
      for (int round = 0; round <= 2 * cfg.actions && taken <= cfg.actions; ++round) {
        const auto page = display_top(dom, fitter, params, rated, cfg.top_papers, cfg.n_display,
                                      gamma, derive_seed(session_seed, round));
        result.rows.push_back({"tradeoff", group, session_seed, arm, taken, "unique_terms",
                               static_cast<double>(page.unique_terms)});
        xs.push_back(taken);
        ys.push_back(static_cast<double>(page.unique_terms));
        if (taken == cfg.actions) break;
        // The simulated user reacts to the most clearly on- or off-topic
        // displayed term it has not rated yet.
        std::optional<AdviceAction> choice;
        double best = 0.0;
        for (const auto& e : page.explanations) {
          for (const auto& t : e.terms) {
            if (acted.count(t.feature)) continue;
            const double a = oracle.affinity(corpus.vocab().term(t.feature));
            if (std::abs(a) > best) {
              best = std::abs(a);
              choice = AdviceAction(t.feature, a > 0 ? 1 : -1);
            }
          }
        }
        if (!choice) continue;
        acted.insert(choice->feature);
        params = limeade_update(model, params, data, nullptr, *choice,
                                CentroidTopActivation{cfg.pool_top, 1}, corpus.bridge(), kernel,
                                cfg.advice_weight, cfg.train)
                     .new_params;
        ++taken;
      }
      if (xs.size() >= 2 && xs.front() != xs.back()) {
        const double slope = metrics::ls_slope(xs, ys);
        slopes[arm].push_back(slope);
        result.rows.push_back({"tradeoff", group, session_seed, arm, taken, "slope", slope});
      } else {
        ++result.skipped;
      }
    }
  }
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& [arm, v] : slopes) {
    arms[arm] = {{"mean_slope", metrics::mean(v)}, {"sessions", v.size()}};
  }
  const auto& g = slopes[policy_name(kGreedy)];
  const auto& d = slopes[policy_name(cfg.gamma)];
  result.summary = {{"study", "tradeoff"}, {"policies", std::move(arms)}, {"skipped", result.skipped}};
  if (g.size() == d.size() && g.size() >= 2) {
    result.summary["aggregate"] = detail::ttest_json(g, d);
  }
  return result;
}

}  // namespace steer::harness

#endif  // STEER_HARNESS_HPP_
