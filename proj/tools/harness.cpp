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

// Experiment runner: image-study, feed-sim, tradeoff, gen-corpus.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steer/harness.hpp"
#include "steer/synthetic.hpp"

namespace {

// Flat JSON objects as CLI11 config files: {"classes": 20, "sizes": [2, 5]}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? nlohmann::json(r[0]) : nlohmann::json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      auto scalar = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
        return v.dump();
      };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else if (value.is_object()) {
        throw CLI::ConversionError("config: nested objects are not supported ('" + key + "')");
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

void write_outputs(const steer::harness::StudyResult& r, const std::string& out,
                   const std::string& summary_out) {
  if (out.empty() || out == "-") {
    steer::harness::write_csv(std::cout, r.rows);
  } else {
    steer::harness::write_csv_file(out, r.rows);
  }
  const std::string summary = r.summary.dump(2) + "\n";
  if (summary_out.empty()) {
    std::cerr << summary;
  } else {
    std::ofstream f(summary_out, std::ios::binary);
    if (!f) throw steer::ValueError("cannot write '" + summary_out + "'");
    f << summary;
  }
}

void add_common(CLI::App* cmd, std::string& out, std::string& summary, std::uint64_t& seed) {
  cmd->set_config("--config", "", "JSON file with option values")->configurable(false);
  cmd->add_option("--out", out, "CSV output path ('-' for stdout)");
  cmd->add_option("--summary", summary, "JSON summary path (default: stderr)");
  cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace steer;
  CLI::App app{"Run advice-steering experiments"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.require_subcommand(1);

  std::string out, summary_out;

  harness::ImageStudyConfig img;
  auto* image = app.add_subcommand("image-study", "Synthetic few-shot classification study");
  add_common(image, out, summary_out, img.master_seed);
  image->add_option("--classes", img.classes)->capture_default_str()->check(CLI::PositiveNumber);
  image->add_option("--seeds", img.seeds)->capture_default_str()->check(CLI::Range(2, 1 << 20));
  image->add_option("--shots", img.shots, "Examples per label")->capture_default_str()
      ->check(CLI::PositiveNumber);
  image->add_option("--neighbors", img.neighbors)->capture_default_str()->check(CLI::PositiveNumber);
  image->add_option("--advice-weight", img.advice_weight)->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  std::string similarity = "interp";
  image->add_option("--similarity", similarity, "Neighbor space")
      ->capture_default_str()->check(CLI::IsMember({"interp", "opaque"}));
  image->add_flag("--combined-arm", img.combined_arm, "Also run labels plus advice");
  image->add_option("--lime-samples", img.lime_samples)->capture_default_str();
  image->add_option("--sigma", img.sigma)->capture_default_str();
  image->add_option("--confound-rate", img.domain.confound_rate)->capture_default_str();

  harness::FeedSimConfig feed;
  auto* feedcmd = app.add_subcommand("feed-sim", "Simulated feed-ranking study");
  add_common(feedcmd, out, summary_out, feed.master_seed);
  feedcmd->add_option("--feeds", feed.feeds)->capture_default_str()->check(CLI::PositiveNumber);
  feedcmd->add_option("--sizes", feed.sizes)->delimiter(',')->capture_default_str();
  feedcmd->add_option("--samples", feed.samples_per_size)->capture_default_str();
  feedcmd->add_option("--advice-weight", feed.advice_weight)->capture_default_str();
  feedcmd->add_flag("--uniform-oracle", feed.uniform_oracle, "Every rated paper equally relevant");
  feedcmd->add_option("--rankings-out", feed.rankings_out, "JSONL dump of evaluated rankings");

  harness::TradeoffConfig trade;
  auto* tradecmd = app.add_subcommand("tradeoff", "Explanation diversity vs term actions");
  add_common(tradecmd, out, summary_out, trade.master_seed);
  tradecmd->add_option("--gamma", trade.gamma, "Sampled policy exponent, run against greedy")
      ->capture_default_str()->check(CLI::PositiveNumber);
  tradecmd->add_option("--sessions", trade.sessions)->capture_default_str()
      ->check(CLI::PositiveNumber);
  tradecmd->add_option("--actions", trade.actions)->capture_default_str()
      ->check(CLI::PositiveNumber);
  tradecmd->add_option("--top-papers", trade.top_papers)->capture_default_str();

  synthetic::SyntheticCorpusSpec cspec;
  std::uint64_t cseed = 7;
  std::string corpus_out;
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus as JSONL");
  gen->add_option("--docs", cspec.n_docs)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--topics", cspec.n_topics)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", cseed)->capture_default_str();
  gen->add_option("--out", corpus_out, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*image) {
      img.similarity =
          similarity == "opaque" ? SimilaritySpace::kOpaque : SimilaritySpace::kInterp;
      write_outputs(harness::run_image_study(img), out, summary_out);
    } else if (*feedcmd) {
      write_outputs(harness::run_feed_simulation(feed), out, summary_out);
    } else if (*tradecmd) {
      write_outputs(harness::run_tradeoff_study(trade), out, summary_out);
    } else if (*gen) {
      const auto c = synthetic::gen_synthetic_corpus(cspec, cseed);
      std::ofstream f(corpus_out, std::ios::binary);
      if (!f) throw ValueError("cannot write '" + corpus_out + "'");
      for (const auto& d : c.docs) f << nlohmann::json(d).dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
