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

#ifndef STEER_SERVICE_HPP_
#define STEER_SERVICE_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/advice.hpp"
#include "steer/errors.hpp"
#include "steer/explain.hpp"
#include "steer/models.hpp"
#include "steer/random.hpp"
#include "steer/textcorpus.hpp"

namespace steer::service {

struct ServiceConfig {
  std::string data_dir;  // empty: no persistence
  double advice_weight = 1.0;
  double gamma = 4.0;
  int n_display = 4;
  int page_size = 10;
  int pool_top = 100;
  double surrogate_ridge = 0.1;
  TrainConfig train{1.0, 500, 1e-3, 0, StepRule::kCurvatureScaled};
  std::uint64_t master_seed = 7;

  void validate() const {
    if (!(advice_weight > 0.0)) throw ValueError("advice weight must be > 0");
    if (!(gamma > 0.0)) throw ValueError("gamma must be > 0");
    if (n_display < 1 || page_size < 1 || pool_top < 1) throw ValueError("bad display sizes");
    if (!(surrogate_ridge > 0.0)) throw ValueError("surrogate ridge must be > 0");
    train.validate();
  }
};

enum class EventKind { kPaper, kTerm };

struct HistoryEvent {
  std::string timestamp;
  EventKind kind = EventKind::kPaper;
  std::string target;  // doc id or term
  int polarity = 1;
  int retained = 0;  // term events only
};

inline void to_json(nlohmann::json& j, const HistoryEvent& e) {
  j = {{"timestamp", e.timestamp},
       {"kind", e.kind == EventKind::kPaper ? "paper" : "term"},
       {"target", e.target},
       {"polarity", e.polarity}};
  if (e.kind == EventKind::kTerm) j["retained"] = e.retained;
}

inline void from_json(const nlohmann::json& j, HistoryEvent& e) {
  e.timestamp = j.value("timestamp", std::string());
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "paper") {
    e.kind = EventKind::kPaper;
  } else if (kind == "term") {
    e.kind = EventKind::kTerm;
  } else {
    throw ValueError("unknown history kind '" + kind + "'");
  }
  e.target = j.at("target").get<std::string>();
  e.polarity = j.at("polarity").get<int>();
  e.retained = j.value("retained", 0);
}

struct RatedTerm {
  std::string term;
  double contribution = 0.0;
};

struct PaperCard {
  std::string doc_id;
  std::string title;
  double score = 0.0;
  int rank = 0;
  std::vector<RatedTerm> explanation;
};

struct RecommendationPage {
  std::string feed_id;
  std::uint64_t version = 0;
  int page = 1;
  std::vector<PaperCard> papers;
};

inline nlohmann::json explanation_json(const std::string& doc_id,
                                       const std::vector<RatedTerm>& terms) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms) {
    arr.push_back({{"term", t.term},
                   {"contribution", t.contribution},
                   {"polarity", t.contribution >= 0.0 ? 1 : -1}});
  }
  return {{"doc_id", doc_id}, {"terms", std::move(arr)}};
}

inline void to_json(nlohmann::json& j, const RecommendationPage& p) {
  nlohmann::json papers = nlohmann::json::array();
  for (const auto& c : p.papers) {
    papers.push_back({{"doc_id", c.doc_id},
                      {"title", c.title},
                      {"score", c.score},
                      {"rank", c.rank},
                      {"explanation", explanation_json(c.doc_id, c.explanation)}});
  }
  j = {{"feed_id", p.feed_id}, {"version", p.version}, {"page", p.page},
       {"papers", std::move(papers)}};
}

struct TermRatingResult {
  int retained_count = 0;
  int discarded_count = 0;
  std::uint64_t version = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Write `content` to `path` through a sibling temp file and rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// One user's feed. Everything is derived from the seeds and the history, so
// a snapshot can be replayed from scratch.
struct FeedState {
  std::string id;
  std::vector<std::string> seeds;
  std::uint64_t display_seed = 0;
  std::uint64_t version = 0;
  ModelParams params;
  Dataset data;
  std::unordered_map<std::size_t, std::size_t> rated;  // doc -> index in data.labeled
  std::vector<HistoryEvent> history;

  nlohmann::json snapshot() const {
    return {{"feed_id", id},
            {"seed_doc_ids", seeds},
            {"display_seed", display_seed},
            {"version", version},
            {"params", params},
            {"history", history}};
  }
};

struct FeedSession {
  FeedState state;
  mutable std::shared_mutex mu;
};

class FeedService {
 public:
  FeedService(std::shared_ptr<const text::Corpus> corpus, ServiceConfig cfg)
      : corpus_(std::move(corpus)), cfg_(std::move(cfg)) {
    if (!corpus_) throw ValueError("service: corpus required");
    if (corpus_->size() < 2) throw ValueError("service: corpus needs at least 2 documents");
    cfg_.validate();
    fitter_ = std::make_unique<GlobalSurrogateFitter>(corpus_->interp_rows(), cfg_.surrogate_ridge);
    stems_.reserve(corpus_->vocab().size());
    for (const auto& t : corpus_->vocab().terms()) stems_.push_back(stem(t));
    if (!cfg_.data_dir.empty()) {
      std::filesystem::create_directories(cfg_.data_dir);
      load_all();
    }
  }

  const text::Corpus& corpus() const noexcept { return *corpus_; }
  const ServiceConfig& config() const noexcept { return cfg_; }

  std::string create_feed(const std::vector<std::string>& seed_ids) {
    if (seed_ids.empty()) throw ValueError("at least one seed document is required");
    std::vector<std::string> seeds = seed_ids;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    for (const auto& s : seeds) doc_index(s);
    if (seeds.size() >= corpus_->size()) throw ValueError("seeds cover the whole corpus");

    std::string id;
    {
      std::unique_lock lock(feeds_mu_);
      do {
        id = make_feed_id(next_feed_++);
      } while (feeds_.count(id));
    }
    auto session = std::make_shared<FeedSession>();
    session->state = build_state(id, seeds);
    persist(session->state);
    {
      std::unique_lock lock(feeds_mu_);
      feeds_[id] = session;
    }
    return id;
  }

  RecommendationPage get_feed(const std::string& feed_id, int page = 1) const {
    if (page < 1) throw ValueError("page must be >= 1");
    auto session = find(feed_id);
    std::shared_lock lock(session->mu);
    const auto& instances = *corpus_->instances();
    std::vector<double> scores(instances.size());
    for (std::size_t d = 0; d < instances.size(); ++d) {
      scores[d] = score(session->state.params, instances[d].x());
    }
    std::vector<std::size_t> order;
    for (std::size_t d = 0; d < instances.size(); ++d) {
      if (!session->state.rated.count(d)) order.push_back(d);
    }
    const auto& docs = corpus_->docs();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : docs[a].id < docs[b].id;
    });

    RecommendationPage out;
    out.feed_id = feed_id;
    out.version = session->state.version;
    out.page = page;
    const auto size = static_cast<std::size_t>(cfg_.page_size);
    const std::size_t begin = static_cast<std::size_t>(page - 1) * size;
    if (begin >= order.size()) return out;
    const std::size_t end = std::min(order.size(), begin + size);

    const Surrogate g = fitter_->fit(scores);
    const auto stem_of = [this](FeatureIndex j) { return stems_[j]; };
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t d = order[r];
      PaperCard card;
      card.doc_id = docs[d].id;
      card.title = docs[d].title;
      card.score = scores[d];
      card.rank = static_cast<int>(r + 1);
      const auto contribs = contributions(g, instances[d].x_interp());
      const auto e = select_display_terms(
          contribs, cfg_.n_display, cfg_.gamma,
          derive_seed(session->state.display_seed, hash_string(docs[d].id)), stem_of, docs[d].id);
      for (const auto& t : e.terms) {
        card.explanation.push_back({corpus_->vocab().term(t.feature), t.value});
      }
      out.papers.push_back(std::move(card));
    }
    return out;
  }

  std::uint64_t rate_paper(const std::string& feed_id, const std::string& doc_id, int polarity) {
    check_polarity(polarity);
    const std::size_t d = doc_index(doc_id);
    auto session = find(feed_id);
    std::unique_lock lock(session->mu);
    HistoryEvent e{utc_timestamp(), EventKind::kPaper, doc_id, polarity, 0};
    FeedState next = session->state;
    apply_paper(next, d, polarity);
    next.history.push_back(e);
    ++next.version;
    persist(next);
    session->state = std::move(next);
    return session->state.version;
  }

  TermRatingResult rate_term(const std::string& feed_id, const std::string& term, int polarity) {
    check_polarity(polarity);
    const auto j = corpus_->vocab().find(lowercase(term));
    if (!j) throw ValueError("unknown term '" + term + "'");
    auto session = find(feed_id);
    std::unique_lock lock(session->mu);
    FeedState next = session->state;
    const UpdateReport report = apply_term(next, *j, polarity);
    HistoryEvent e{utc_timestamp(), EventKind::kTerm, corpus_->vocab().term(*j), polarity,
                   report.retained_count};
    next.history.push_back(e);
    ++next.version;
    persist(next);
    session->state = std::move(next);
    return {report.retained_count, report.discarded_count, session->state.version};
  }

  std::vector<HistoryEvent> history(const std::string& feed_id) const {
    auto session = find(feed_id);
    std::shared_lock lock(session->mu);
    return session->state.history;
  }

  nlohmann::json snapshot(const std::string& feed_id) const {
    auto session = find(feed_id);
    std::shared_lock lock(session->mu);
    return session->state.snapshot();
  }

  ModelParams params(const std::string& feed_id) const {
    auto session = find(feed_id);
    std::shared_lock lock(session->mu);
    return session->state.params;
  }

  const text::Document& document(const std::string& doc_id) const {
    return corpus_->docs()[doc_index(doc_id)];
  }

  std::vector<std::string> feed_ids() const {
    std::shared_lock lock(feeds_mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : feeds_) out.push_back(id);
    return out;
  }

  // Rebuild a session from a snapshot by replaying its history. Throws
  // NumericError if the replayed parameters differ from the stored ones.
  FeedState replay(const nlohmann::json& snap) const {
    const auto id = snap.at("feed_id").get<std::string>();
    const auto seeds = snap.at("seed_doc_ids").get<std::vector<std::string>>();
    FeedState st = build_state(id, seeds);
    if (snap.contains("display_seed") &&
        snap.at("display_seed").get<std::uint64_t>() != st.display_seed) {
      throw ValueError("snapshot '" + id + "': display seed mismatch");
    }
    for (const auto& ej : snap.at("history")) {
      HistoryEvent e = ej.get<HistoryEvent>();
      if (e.kind == EventKind::kPaper) {
        apply_paper(st, doc_index(e.target), e.polarity);
      } else {
        const auto j = corpus_->vocab().find(e.target);
        if (!j) throw ValueError("snapshot '" + id + "': unknown term '" + e.target + "'");
        apply_term(st, *j, e.polarity);
      }
      st.history.push_back(std::move(e));
      ++st.version;
    }
    if (st.version != snap.at("version").get<std::uint64_t>()) {
      throw ValueError("snapshot '" + id + "': version does not match history");
    }
    if (!(st.params == snap.at("params").get<ModelParams>())) {
      throw NumericError("snapshot '" + id + "': replay does not reproduce stored parameters");
    }
    return st;
  }

 private:
  static void check_polarity(int polarity) {
    if (polarity != 1 && polarity != -1) throw ValueError("polarity must be -1 or +1");
  }

  static std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  static std::string make_feed_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "feed-%06llu", static_cast<unsigned long long>(n));
    return buf;
  }

  std::size_t doc_index(const std::string& doc_id) const {
    const auto i = corpus_->index_of(doc_id);
    if (!i) throw NotFound("unknown document '" + doc_id + "'");
    return *i;
  }

  std::shared_ptr<FeedSession> find(const std::string& feed_id) const {
    std::shared_lock lock(feeds_mu_);
    auto it = feeds_.find(feed_id);
    if (it == feeds_.end()) throw NotFound("unknown feed '" + feed_id + "'");
    return it->second;
  }

  // Seeds labeled +1 plus as many random corpus negatives, then the first fit.
  FeedState build_state(const std::string& id, const std::vector<std::string>& seeds) const {
    FeedState s;
    s.id = id;
    s.seeds = seeds;
    std::uint64_t key = cfg_.master_seed;
    for (const auto& seed : seeds) key = derive_seed(key, hash_string(seed));
    s.display_seed = derive_seed(key, 0xD15);
    const auto& instances = *corpus_->instances();
    std::vector<WeightedExample> labeled;
    std::unordered_set<std::size_t> taken;
    for (const auto& seed : seeds) {
      const std::size_t d = doc_index(seed);
      taken.insert(d);
      s.rated[d] = labeled.size();
      labeled.emplace_back(instances[d].x(), 1, 1.0);
    }
    Rng rng(key);
    const std::size_t want = std::min(seeds.size(), corpus_->size() - seeds.size());
    for (std::size_t drawn = 0; drawn < want;) {
      const std::size_t d = rng.below(corpus_->size());
      if (!taken.insert(d).second) continue;
      labeled.emplace_back(instances[d].x(), -1, 1.0);
      ++drawn;
    }
    s.data = Dataset(corpus_->instances(), std::move(labeled));
    s.params = model_.fit(s.data.labeled, cfg_.train);
    s.version = 1;
    return s;
  }

  void apply_paper(FeedState& s, std::size_t d, int polarity) const {
    const auto& inst = (*corpus_->instances())[d];
    if (auto it = s.rated.find(d); it != s.rated.end()) {
      s.data.labeled[it->second] = WeightedExample(inst.x(), polarity, 1.0);
    } else {
      s.rated[d] = s.data.labeled.size();
      s.data.labeled.emplace_back(inst.x(), polarity, 1.0);
    }
    s.params = model_.fit(s.data.labeled, cfg_.train);
  }

  UpdateReport apply_term(FeedState& s, FeatureIndex j, int polarity) const {
    UpdateReport r = limeade_update(model_, s.params, s.data, nullptr, AdviceAction(j, polarity),
                                    CentroidTopActivation{cfg_.pool_top, 1}, corpus_->bridge(),
                                    ProximityKernel{}, cfg_.advice_weight, cfg_.train);
    s.params = r.new_params;
    return r;
  }

  std::filesystem::path snapshot_path(const std::string& id) const {
    return std::filesystem::path(cfg_.data_dir) / (id + ".json");
  }

  void persist(const FeedState& s) const {
    if (cfg_.data_dir.empty()) return;
    atomic_write(snapshot_path(s.id), s.snapshot().dump(2) + "\n");
  }

  void load_all() {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(cfg_.data_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      const auto snap = nlohmann::json::parse(in);
      auto session = std::make_shared<FeedSession>();
      session->state = replay(snap);
      feeds_[session->state.id] = session;
      unsigned long long n = 0;
      if (std::sscanf(session->state.id.c_str(), "feed-%llu", &n) == 1) {
        next_feed_ = std::max<std::uint64_t>(next_feed_, n + 1);
      }
    }
  }

  std::shared_ptr<const text::Corpus> corpus_;
  ServiceConfig cfg_;
  HingeRanker model_;
  std::unique_ptr<GlobalSurrogateFitter> fitter_;
  std::vector<std::string> stems_;
  mutable std::shared_mutex feeds_mu_;
  std::map<std::string, std::shared_ptr<FeedSession>> feeds_;
  std::uint64_t next_feed_ = 1;
};

}  // namespace steer::service

#endif  // STEER_SERVICE_HPP_
