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

// Feed-curation HTTP server.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "steer/service_http.hpp"
#include "steer/synthetic.hpp"
#include "steer/textcorpus.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  using namespace steer;
  CLI::App app{"Serve interactive feed curation over a corpus"};

  std::string corpus_path, vocab_path, host = "127.0.0.1";
  int port = 8080;
  std::size_t synthetic_docs = 1200;
  std::uint64_t corpus_seed = 7;
  text::CorpusOptions copt;
  service::ServiceConfig cfg;

  app.add_option("--corpus", corpus_path, "JSONL corpus {id, title, abstract}")
      ->envname("STEER_CORPUS")->check(CLI::ExistingFile);
  app.add_option("--synthetic-docs", synthetic_docs, "Generated corpus size when --corpus is unset")
      ->capture_default_str();
  app.add_option("--corpus-seed", corpus_seed, "Seed of the generated corpus")
      ->capture_default_str();
  app.add_option("--vocab", vocab_path, "Vocabulary JSON {terms, df, num_docs} to use as-is")
      ->envname("STEER_VOCAB")->check(CLI::ExistingFile);
  app.add_option("--vocab-size", copt.vocab_size)->capture_default_str();
  app.add_option("--data-dir", cfg.data_dir, "Directory for feed snapshots")
      ->envname("STEER_DATA_DIR")->required();
  app.add_option("--host", host)->envname("STEER_HOST")->capture_default_str();
  app.add_option("--port", port)->envname("STEER_PORT")->capture_default_str()
      ->check(CLI::Range(0, 65535));
  app.add_option("--advice-weight", cfg.advice_weight)->envname("STEER_ADVICE_WEIGHT")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--gamma", cfg.gamma, "Explanation sampling exponent")
      ->envname("STEER_GAMMA")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.master_seed)->envname("STEER_SEED")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<text::Document> docs =
        corpus_path.empty()
            ? synthetic::gen_synthetic_corpus({.n_docs = synthetic_docs}, corpus_seed).docs
            : text::read_jsonl_file(corpus_path);
    std::optional<text::Vocabulary> vocab;
    if (!vocab_path.empty()) {
      std::ifstream in(vocab_path, std::ios::binary);
      vocab = text::Vocabulary::from_json(nlohmann::json::parse(in), docs.size());
    }
    auto corpus = std::make_shared<const text::Corpus>(std::move(docs), copt, std::move(vocab));
    service::FeedService svc(corpus, cfg);
    httplib::Server server;
    service::register_routes(server, svc);
    std::cerr << "serving " << corpus->size() << " documents, " << svc.feed_ids().size()
              << " feeds restored, on http://" << host << ':' << port << '\n';
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
