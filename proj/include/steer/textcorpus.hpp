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

// Paired representations for text: uni/bigram TF-IDF activations as the
// interpretable side and a seeded random projection of them as the opaque
// side.

#ifndef STEER_TEXTCORPUS_HPP_
#define STEER_TEXTCORPUS_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/core.hpp"
#include "steer/random.hpp"

namespace steer::text {

struct Document {
  std::string id;
  std::string title;
  std::string abstract;
};

inline void to_json(nlohmann::json& j, const Document& d) {
  j = nlohmann::json{{"id", d.id}, {"title", d.title}, {"abstract", d.abstract}};
}
inline void from_json(const nlohmann::json& j, Document& d) {
  j.at("id").get_to(d.id);
  j.at("title").get_to(d.title);
  d.abstract = j.value("abstract", std::string{});
}

inline constexpr std::array<std::string_view, 50> kStopwords = {
    "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",
    "at",    "be",    "been",  "but",   "by",    "can",   "for",   "from",  "has",
    "have",  "how",   "in",    "into",  "is",    "it",    "its",   "more",  "not",
    "of",    "on",    "or",    "our",   "over",  "such",  "than",  "that",  "the",
    "their", "then",  "there", "these", "they",  "this",  "to",    "via",   "was",
    "we",    "were",  "which", "will",  "with"};

inline bool is_stopword(std::string_view w) {
  return std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end();
}

// Lowercase, split on non-alphanumerics, drop short tokens and stopwords,
// then emit surviving unigrams followed by bigrams of adjacent survivors.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !is_stopword(cur)) words.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  std::vector<std::string> out = words;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) out.push_back(words[i] + " " + words[i + 1]);
  return out;
}

// Title and abstract are tokenized separately so no bigram spans them.
inline std::vector<std::string> document_terms(const Document& d) {
  auto terms = tokenize(d.title);
  auto rest = tokenize(d.abstract);
  terms.insert(terms.end(), std::make_move_iterator(rest.begin()),
               std::make_move_iterator(rest.end()));
  return terms;
}

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t num_docs)
      : terms_(std::move(terms)), df_(std::move(df)), num_docs_(num_docs) {
    if (terms_.size() != df_.size()) throw ShapeError("Vocabulary: terms/df length mismatch");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!index_.emplace(terms_[i], static_cast<FeatureIndex>(i)).second) {
        throw ValueError("Vocabulary: duplicate term '" + terms_[i] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t num_docs() const noexcept { return num_docs_; }
  const std::string& term(FeatureIndex j) const { return terms_.at(j); }
  std::size_t df(FeatureIndex j) const { return df_.at(j); }
  std::span<const std::string> terms() const noexcept { return terms_; }
  std::span<const std::size_t> dfs() const noexcept { return df_; }

  std::optional<FeatureIndex> find(std::string_view t) const {
    auto it = index_.find(std::string(t));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  double idf(FeatureIndex j) const {
    return std::log((1.0 + static_cast<double>(num_docs_)) / (1.0 + static_cast<double>(df_.at(j)))) + 1.0;
  }

  nlohmann::json to_json() const {
    return {{"terms", terms_}, {"df", df_}, {"num_docs", num_docs_}};
  }
  static Vocabulary from_json(const nlohmann::json& j, std::size_t fallback_num_docs = 0) {
    return Vocabulary(j.at("terms").get<std::vector<std::string>>(),
                      j.at("df").get<std::vector<std::size_t>>(),
                      j.value("num_docs", fallback_num_docs));
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.num_docs_ == b.num_docs_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t num_docs_ = 0;
  std::unordered_map<std::string, FeatureIndex> index_;
};

// Top-N terms by total count, ties ascending lexicographic. Input is one
// term list per document.
inline Vocabulary build_vocab(std::span<const std::vector<std::string>> doc_terms, std::size_t n) {
  if (doc_terms.empty()) throw ValueError("build_vocab: no documents");
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // count, df
  for (const auto& terms : doc_terms) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : terms) {
      auto& s = stats[t];
      ++s.first;
      if (seen.insert(t).second) ++s.second;
    }
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(),
                                                                                   stats.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second.first > b.second.first;  // map order already lexicographic
  });
  if (ranked.size() > n) ranked.resize(n);
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  for (auto& [t, s] : ranked) {
    terms.push_back(t);
    df.push_back(s.second);
  }
  return Vocabulary(std::move(terms), std::move(df), doc_terms.size());
}

inline Vocabulary build_vocab(std::span<const Document> docs, std::size_t n) {
  std::vector<std::vector<std::string>> terms;
  terms.reserve(docs.size());
  for (const auto& d : docs) terms.push_back(document_terms(d));
  return build_vocab(std::span<const std::vector<std::string>>(terms), n);
}

// count * (ln((1 + D) / (1 + df)) + 1), L2-normalized.
inline InterpVec tfidf_from_terms(std::span<const std::string> terms, const Vocabulary& vocab) {
  std::map<FeatureIndex, double> counts;
  for (const auto& t : terms) {
    if (auto j = vocab.find(t)) counts[*j] += 1.0;
  }
  std::vector<InterpVec::Entry> e;
  double ss = 0.0;
  for (const auto& [j, c] : counts) {
    const double v = c * vocab.idf(j);
    e.emplace_back(j, v);
    ss += v * v;
  }
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (auto& [j, v] : e) v *= inv;
  }
  return InterpVec(vocab.size(), std::move(e));
}

inline InterpVec tfidf(const Document& doc, const Vocabulary& vocab) {
  return tfidf_from_terms(document_terms(doc), vocab);
}

// Dense s' x s matrix with i.i.d. +-1/sqrt(s) entries drawn from the seed.
class ProjectionEmbedder {
 public:
  ProjectionEmbedder(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed)
      : in_dim_(in_dim), out_dim_(out_dim), seed_(seed), matrix_(in_dim * out_dim) {
    if (out_dim == 0) throw ValueError("ProjectionEmbedder: out_dim must be > 0");
    const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
    Rng rng(seed);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < matrix_.size(); ++i) {
      if (i % 64 == 0) bits = rng.next();
      matrix_[i] = (bits & 1) ? scale : -scale;
      bits >>= 1;
    }
  }

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> row(FeatureIndex j) const {
    return std::span<const double>(matrix_).subspan(static_cast<std::size_t>(j) * out_dim_, out_dim_);
  }

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::uint64_t seed_;
  std::vector<double> matrix_;
};

inline OpaqueVec embed(const InterpVec& v, const ProjectionEmbedder& e) {
  if (v.dim() != e.in_dim()) throw ShapeError("embed: dimension mismatch");
  std::vector<double> out(e.out_dim(), 0.0);
  for (const auto& [j, a] : v.entries()) {
    const auto r = e.row(j);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += a * r[d];
  }
  return OpaqueVec(std::move(out));
}

// realize = embed(mask * x'). Corpus documents are paired on load.
class TextBridge final : public DomainBridge {
 public:
  explicit TextBridge(std::shared_ptr<const ProjectionEmbedder> e) : embedder_(std::move(e)) {}

  std::size_t interp_dim() const override { return embedder_->in_dim(); }
  OpaqueVec realize(const Instance& base, const Mask& mask) const override {
    return embed(base.x_interp().masked(mask), *embedder_);
  }
  const ProjectionEmbedder& embedder() const noexcept { return *embedder_; }

  Instance make_instance(std::string id, const InterpVec& x_interp) const {
    OpaqueVec x = embed(x_interp, *embedder_);
    pair(x, x_interp);
    return Instance(std::move(id), std::move(x), x_interp, *this);
  }

 private:
  std::shared_ptr<const ProjectionEmbedder> embedder_;
};

struct CorpusOptions {
  std::size_t vocab_size = 2000;
  std::size_t embed_dim = 64;
  std::uint64_t embed_seed = 17;
};

// A loaded corpus: documents, vocabulary, and one paired Instance per
// document (in document order, id = document id).
class Corpus {
 public:
  Corpus(std::vector<Document> docs, const CorpusOptions& opt,
         std::optional<Vocabulary> vocab = std::nullopt)
      : docs_(std::move(docs)) {
    if (docs_.empty()) throw ValueError("Corpus: no documents");
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      const auto& d = docs_[i];
      if (d.title.empty()) throw ValueError("Corpus: document '" + d.id + "' has an empty title");
      if (!ids.insert(d.id).second) throw ValueError("Corpus: duplicate document id '" + d.id + "'");
      by_id_.emplace(d.id, i);
    }
    std::vector<std::vector<std::string>> terms;
    terms.reserve(docs_.size());
    for (const auto& d : docs_) terms.push_back(document_terms(d));
    vocab_ = vocab ? std::move(*vocab)
                   : build_vocab(std::span<const std::vector<std::string>>(terms), opt.vocab_size);
    bridge_ = std::make_shared<TextBridge>(
        std::make_shared<ProjectionEmbedder>(vocab_.size(), opt.embed_dim, opt.embed_seed));
    auto pool = std::make_shared<std::vector<Instance>>();
    pool->reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      pool->push_back(bridge_->make_instance(docs_[i].id, tfidf_from_terms(terms[i], vocab_)));
    }
    instances_ = std::move(pool);
  }

  std::span<const Document> docs() const noexcept { return docs_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const TextBridge& bridge() const noexcept { return *bridge_; }
  const std::shared_ptr<const std::vector<Instance>>& instances() const noexcept { return instances_; }
  std::size_t size() const noexcept { return docs_.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<InterpVec> interp_rows() const {
    std::vector<InterpVec> rows;
    rows.reserve(instances_->size());
    for (const auto& inst : *instances_) rows.push_back(inst.x_interp());
    return rows;
  }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  Vocabulary vocab_;
  std::shared_ptr<TextBridge> bridge_;
  std::shared_ptr<const std::vector<Instance>> instances_;
};

// JSON Lines, one {id, title, abstract} object per line; blank lines skipped.
inline std::vector<Document> read_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(nlohmann::json::parse(line).get<Document>());
    } catch (const nlohmann::json::exception& e) {
      throw ValueError("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

inline std::vector<Document> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot open corpus file '" + path + "'");
  return read_jsonl(in);
}

}  // namespace steer::text

#endif  // STEER_TEXTCORPUS_HPP_
