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

// Synthetic stand-ins for the experiment harness: a part-based "image"
// domain with a spurious confound, and a topic-mixture text corpus with
// known per-document topic weights.

#ifndef STEER_SYNTHETIC_HPP_
#define STEER_SYNTHETIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "steer/core.hpp"
#include "steer/random.hpp"
#include "steer/textcorpus.hpp"

namespace steer::synthetic {

struct SyntheticDomainSpec {
  std::size_t n_features = 40;
  std::vector<FeatureIndex> object_parts;
  std::vector<FeatureIndex> confound_parts;
  double confound_rate = 0.9;           // P(confound part | positive)
  double negative_confound_rate = 0.05;  // P(confound part | negative)
  double background_rate = 0.2;
  std::size_t opaque_dim = 64;
  double projection_scale = 1.5;
  double noise_sd = 0.05;
  std::size_t pool_size = 2000;
  std::size_t test_per_class = 400;
  double positive_fraction = 0.5;

  void validate() const {
    auto in_range = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_range(confound_rate) || !in_range(negative_confound_rate) ||
        !in_range(background_rate) || !in_range(positive_fraction)) {
      throw ValueError("SyntheticDomainSpec: probabilities must be in [0, 1]");
    }
    std::set<FeatureIndex> obj(object_parts.begin(), object_parts.end());
    for (FeatureIndex j : confound_parts) {
      if (obj.count(j)) throw ValueError("SyntheticDomainSpec: object and confound parts overlap");
    }
    for (FeatureIndex j : object_parts) {
      if (j >= n_features) throw ValueError("SyntheticDomainSpec: object part out of range");
    }
    for (FeatureIndex j : confound_parts) {
      if (j >= n_features) throw ValueError("SyntheticDomainSpec: confound part out of range");
    }
    if (object_parts.empty()) throw ValueError("SyntheticDomainSpec: need at least one object part");
    if (opaque_dim == 0) throw ValueError("SyntheticDomainSpec: opaque_dim must be > 0");
  }
};

// Object/confound parts for one class, drawn from a class-specific
// permutation of the part vocabulary.
inline SyntheticDomainSpec class_spec(SyntheticDomainSpec base, std::uint64_t class_seed,
                                      std::size_t n_object = 3, std::size_t n_confound = 2) {
  std::vector<FeatureIndex> perm(base.n_features);
  std::iota(perm.begin(), perm.end(), FeatureIndex{0});
  Rng rng(class_seed);
  rng.shuffle(perm.begin(), perm.end());
  base.object_parts.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_object));
  base.confound_parts.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_object),
                             perm.begin() + static_cast<std::ptrdiff_t>(n_object + n_confound));
  std::sort(base.object_parts.begin(), base.object_parts.end());
  std::sort(base.confound_parts.begin(), base.confound_parts.end());
  return base;
}

// x = tanh(pre), pre = P x' + noise. Removing parts subtracts their
// projection rows from the stored pre-activation.
class PartsBridge final : public DomainBridge {
 public:
  PartsBridge(std::size_t n_features, std::size_t opaque_dim, double scale, std::uint64_t seed)
      : n_features_(n_features), opaque_dim_(opaque_dim), projection_(n_features * opaque_dim) {
    const double v = scale / std::sqrt(static_cast<double>(opaque_dim));
    Rng rng(seed);
    for (auto& p : projection_) p = rng.bernoulli(0.5) ? v : -v;
  }

  std::size_t interp_dim() const override { return n_features_; }
  std::size_t opaque_dim() const noexcept { return opaque_dim_; }
  // Pre-activation direction of part j.
  std::span<const double> row(FeatureIndex j) const {
    if (j >= n_features_) throw ShapeError("PartsBridge: part index out of range");
    return std::span<const double>(projection_).subspan(static_cast<std::size_t>(j) * opaque_dim_,
                                                        opaque_dim_);
  }

  OpaqueVec realize(const Instance& base, const Mask& mask) const override {
    if (mask.size() != n_features_) throw ShapeError("PartsBridge: mask length mismatch");
    auto it = pre_.find(base.id());
    if (it == pre_.end()) throw ValueError("PartsBridge: unknown base instance '" + base.id() + "'");
    std::vector<double> z = it->second;
    for (const auto& [j, a] : base.x_interp().entries()) {
      if (mask[j]) continue;
      const double* row = &projection_[static_cast<std::size_t>(j) * opaque_dim_];
      for (std::size_t d = 0; d < opaque_dim_; ++d) z[d] -= a * row[d];
    }
    for (double& v : z) v = std::tanh(v);
    return OpaqueVec(std::move(z));
  }

  // Not thread-safe; call only while building the domain.
  Instance make_instance(std::string id, const InterpVec& parts, Rng& rng, double noise_sd) {
    std::vector<double> z(opaque_dim_, 0.0);
    for (const auto& [j, a] : parts.entries()) {
      const double* row = &projection_[static_cast<std::size_t>(j) * opaque_dim_];
      for (std::size_t d = 0; d < opaque_dim_; ++d) z[d] += a * row[d];
    }
    for (double& v : z) v += noise_sd * rng.normal();
    std::vector<double> x(z);
    for (double& v : x) v = std::tanh(v);
    OpaqueVec ox(std::move(x));
    pair(ox, parts);
    pre_.emplace(id, std::move(z));
    return Instance(std::move(id), std::move(ox), parts, *this);
  }

 private:
  std::size_t n_features_;
  std::size_t opaque_dim_;
  std::vector<double> projection_;
  std::unordered_map<std::string, std::vector<double>> pre_;
};

struct SyntheticDomain {
  SyntheticDomainSpec spec;
  std::shared_ptr<PartsBridge> bridge;
  Dataset data;  // pool only
  std::vector<int> pool_labels;
  std::vector<Instance> test;
  std::vector<int> test_labels;

  // Ground-truth mask of a positive instance: its object parts.
  std::vector<FeatureIndex> truth(std::size_t pool_index) const {
    if (pool_labels.at(pool_index) < 0) return {};
    return spec.object_parts;
  }
};

namespace detail {

inline InterpVec draw_parts(const SyntheticDomainSpec& spec, bool positive, Rng& rng) {
  std::vector<InterpVec::Entry> e;
  std::set<FeatureIndex> obj(spec.object_parts.begin(), spec.object_parts.end());
  std::set<FeatureIndex> conf(spec.confound_parts.begin(), spec.confound_parts.end());
  for (FeatureIndex j = 0; j < spec.n_features; ++j) {
    bool on;
    if (obj.count(j)) {
      on = positive;
    } else if (conf.count(j)) {
      on = rng.bernoulli(positive ? spec.confound_rate : spec.negative_confound_rate);
    } else {
      on = rng.bernoulli(spec.background_rate);
    }
    if (on) e.emplace_back(j, 1.0);
  }
  return InterpVec(spec.n_features, std::move(e));
}

inline std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
  return buf;
}

}  // namespace detail

inline SyntheticDomain gen_synthetic_domain(const SyntheticDomainSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticDomain dom;
  dom.spec = spec;
  dom.bridge = std::make_shared<PartsBridge>(spec.n_features, spec.opaque_dim,
                                             spec.projection_scale, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  auto pool = std::make_shared<std::vector<Instance>>();
  pool->reserve(spec.pool_size);
  for (std::size_t i = 0; i < spec.pool_size; ++i) {
    const bool positive = rng.bernoulli(spec.positive_fraction);
    pool->push_back(dom.bridge->make_instance(detail::padded("p", i),
                                              detail::draw_parts(spec, positive, rng), rng,
                                              spec.noise_sd));
    dom.pool_labels.push_back(positive ? 1 : -1);
  }
  Rng test_rng(derive_seed(seed, 2));
  for (std::size_t i = 0; i < 2 * spec.test_per_class; ++i) {
    const bool positive = i < spec.test_per_class;
    dom.test.push_back(dom.bridge->make_instance(detail::padded("t", i),
                                                 detail::draw_parts(spec, positive, test_rng),
                                                 test_rng, spec.noise_sd));
    dom.test_labels.push_back(positive ? 1 : -1);
  }
  dom.data = Dataset(std::move(pool));
  return dom;
}

// Text dump of every instance, for determinism checks.
inline std::string dump_domain(const SyntheticDomain& dom) {
  std::ostringstream out;
  out.precision(17);
  auto emit = [&](const Instance& inst, int label) {
    out << inst.id() << ' ' << label;
    for (const auto& [j, v] : inst.x_interp().entries()) out << ' ' << j;
    out << " |";
    for (double v : inst.x().values()) out << ' ' << v;
    out << '\n';
  };
  for (std::size_t i = 0; i < dom.data.pool->size(); ++i) emit((*dom.data.pool)[i], dom.pool_labels[i]);
  for (std::size_t i = 0; i < dom.test.size(); ++i) emit(dom.test[i], dom.test_labels[i]);
  return out.str();
}

struct SyntheticCorpusSpec {
  std::size_t n_docs = 1200;
  std::size_t n_topics = 10;
  std::size_t words_per_topic = 40;
  std::size_t n_general_words = 150;
  std::size_t title_len = 8;
  std::size_t abstract_len = 60;
  double topic_token_share = 0.55;
  double secondary_topic_prob = 0.5;
  double secondary_topic_weight = 0.3;
};

struct SyntheticCorpus {
  std::vector<text::Document> docs;
  // doc_topics[d][t]: mixture weight of topic t in document d.
  std::vector<std::vector<double>> doc_topics;
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::string> general_words;

  std::size_t primary_topic(std::size_t d) const {
    const auto& th = doc_topics[d];
    return static_cast<std::size_t>(std::max_element(th.begin(), th.end()) - th.begin());
  }
};

namespace detail {

// Pronounceable pseudo-words ending in a vowel, so no stemming rule applies.
inline std::vector<std::string> make_words(std::size_t n, Rng& rng,
                                           std::unordered_set<std::string>& used) {
  static constexpr char kCons[] = "bdfgklmnprtvz";
  static constexpr char kVow[] = "aeiou";
  std::vector<std::string> out;
  while (out.size() < n) {
    const std::size_t syll = 2 + rng.below(2);
    std::string w;
    for (std::size_t s = 0; s < syll; ++s) {
      w += kCons[rng.below(sizeof kCons - 1)];
      w += kVow[rng.below(sizeof kVow - 1)];
    }
    if (text::is_stopword(w) || !used.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

// Zipf(1) rank sampler over n items.
inline std::size_t zipf(std::size_t n, Rng& rng) {
  double h = 0.0;
  for (std::size_t i = 1; i <= n; ++i) h += 1.0 / static_cast<double>(i);
  double u = rng.uniform() * h;
  for (std::size_t i = 1; i <= n; ++i) {
    u -= 1.0 / static_cast<double>(i);
    if (u < 0.0) return i - 1;
  }
  return n - 1;
}

}  // namespace detail

inline SyntheticCorpus gen_synthetic_corpus(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  if (spec.n_topics < 2 || spec.n_docs == 0) throw ValueError("SyntheticCorpusSpec: invalid sizes");
  SyntheticCorpus c;
  Rng rng(seed);
  std::unordered_set<std::string> used;
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    c.topic_words.push_back(detail::make_words(spec.words_per_topic, rng, used));
  }
  c.general_words = detail::make_words(spec.n_general_words, rng, used);

  auto draw_word = [&](const std::vector<double>& theta) -> const std::string& {
    if (rng.bernoulli(spec.topic_token_share)) {
      double u = rng.uniform();
      std::size_t t = 0;
      for (; t + 1 < theta.size(); ++t) {
        u -= theta[t];
        if (u < 0.0) break;
      }
      const auto& words = c.topic_words[t];
      return words[detail::zipf(words.size(), rng)];
    }
    return c.general_words[detail::zipf(c.general_words.size(), rng)];
  };

  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    std::vector<double> theta(spec.n_topics, 0.0);
    const std::size_t t1 = rng.below(spec.n_topics);
    theta[t1] = 1.0;
    if (rng.bernoulli(spec.secondary_topic_prob)) {
      std::size_t t2 = rng.below(spec.n_topics - 1);
      if (t2 >= t1) ++t2;
      theta[t1] = 1.0 - spec.secondary_topic_weight;
      theta[t2] = spec.secondary_topic_weight;
    }
    text::Document doc;
    doc.id = detail::padded("doc", d);
    for (std::size_t i = 0; i < spec.title_len; ++i) {
      if (i) doc.title += ' ';
      doc.title += draw_word(theta);
    }
    for (std::size_t i = 0; i < spec.abstract_len; ++i) {
      if (i) doc.abstract += ' ';
      doc.abstract += draw_word(theta);
    }
    c.docs.push_back(std::move(doc));
    c.doc_topics.push_back(std::move(theta));
  }
  return c;
}

// +1 for words of a preferred topic, -1 for words of other topics, 0 for
// general words; bigrams average their two words.
class TermOracle {
 public:
  TermOracle(const SyntheticCorpus& corpus, std::set<std::size_t> preferred)
      : preferred_(std::move(preferred)) {
    for (std::size_t t = 0; t < corpus.topic_words.size(); ++t) {
      for (const auto& w : corpus.topic_words[t]) word_topic_.emplace(w, t);
    }
  }

  double affinity(std::string_view term) const {
    if (const auto sp = term.find(' '); sp != std::string_view::npos) {
      return 0.5 * (affinity(term.substr(0, sp)) + affinity(term.substr(sp + 1)));
    }
    auto it = word_topic_.find(std::string(term));
    if (it == word_topic_.end()) return 0.0;
    return preferred_.count(it->second) ? 1.0 : -1.0;
  }

  // Graded relevance: total mixture weight on preferred topics.
  double relevance(const SyntheticCorpus& corpus, std::size_t doc) const {
    double r = 0.0;
    for (std::size_t t : preferred_) r += corpus.doc_topics[doc][t];
    return r;
  }

  const std::set<std::size_t>& preferred() const noexcept { return preferred_; }

 private:
  std::set<std::size_t> preferred_;
  std::unordered_map<std::string, std::size_t> word_topic_;
};

}  // namespace steer::synthetic

#endif  // STEER_SYNTHETIC_HPP_
