/*
 * Copyright 2026 The wmlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Attribution scenarios:
//   A  no model watermarks
//   B  exactly one model watermarks
//   C  every model watermarks, each with its own key

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmlab/classifier.hpp"
#include "wmlab/common.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/stealing.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

enum class Scenario { kA, kB, kC };

inline std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kA: return "A";
    case Scenario::kB: return "B";
    case Scenario::kC: return "C";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view name) {
  if (name == "A" || name == "a") return Scenario::kA;
  if (name == "B" || name == "b") return Scenario::kB;
  if (name == "C" || name == "c") return Scenario::kC;
  fail(ErrorCode::kInvalidParameter, "unknown scenario '" + std::string(name) + "'");
}

// A registered scheme. The key in `config` is replaced by each model's own.
struct NamedScheme {
  std::string name;
  SchemeConfig config;
};

struct ScenarioSpec {
  Scenario scenario = Scenario::kA;
  std::vector<std::string> models;
  std::vector<std::string> watermarked_models;
  std::optional<std::string> scheme;

  static ScenarioSpec a(std::vector<std::string> models) {
    return {Scenario::kA, std::move(models), {}, std::nullopt};
  }
  static ScenarioSpec b(std::vector<std::string> models, std::string marked, std::string scheme) {
    return {Scenario::kB, std::move(models), {std::move(marked)}, std::move(scheme)};
  }
  static ScenarioSpec c(std::vector<std::string> models, std::string scheme) {
    ScenarioSpec s{Scenario::kC, std::move(models), {}, std::move(scheme)};
    s.watermarked_models = s.models;
    return s;
  }

  bool is_watermarked(const std::string& model) const {
    return std::find(watermarked_models.begin(), watermarked_models.end(), model) !=
           watermarked_models.end();
  }

  void validate() const {
    require(models.size() >= 2, ErrorCode::kInvalidParameter, "a scenario needs >= 2 models");
    for (const auto& m : watermarked_models) {
      require(std::find(models.begin(), models.end(), m) != models.end(),
              ErrorCode::kInvalidParameter, "watermarked model '" + m + "' is not in the scenario");
    }
    switch (scenario) {
      case Scenario::kA:
        require(watermarked_models.empty(), ErrorCode::kInvalidParameter,
                "scenario A watermarks no model");
        break;
      case Scenario::kB:
        require(watermarked_models.size() == 1, ErrorCode::kInvalidParameter,
                "scenario B watermarks exactly one model");
        break;
      case Scenario::kC: {
        auto a = models, b = watermarked_models;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        require(a == b, ErrorCode::kInvalidParameter, "scenario C watermarks every model");
        break;
      }
    }
    require(scenario == Scenario::kA || scheme.has_value(), ErrorCode::kInvalidParameter,
            "scenarios B and C need a scheme");
  }
};

struct BankOptions {
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 100;
  std::size_t completion_length = 200;
  std::size_t histogram_size = kDefaultHistogramSize;
  bool scheme_features = true;
  std::uint64_t secret = 0;
  TrainOptions train;
};

inline constexpr int kNoScheme = -1;

// Lazily generated texts, features and perplexities for one seed. Entry
// (model, scheme) holds per_class() completions of that model, watermarked
// under the scheme with the model's key, or unwatermarked for kNoScheme.
// Text j of every entry uses prompt j and the same sampling seed, so entries
// are paired. Not thread-safe.
class TextBank {
 public:
  TextBank(const Lab& lab, std::vector<NamedScheme> schemes, BankOptions opts,
           std::uint64_t rng_seed)
      : lab_(lab), schemes_(std::move(schemes)), opts_(opts), seed_(rng_seed) {
    require(opts_.train_per_class >= 1 && opts_.test_per_class >= 1, ErrorCode::kInvalidParameter,
            "train and test sizes must be >= 1");
    const auto picked = choose_prompts(lab_.prompts.size(), per_class(), derive_seed(seed_, 0x70));
    for (std::size_t idx : picked) prompts_.push_back(lab_.prompts[idx]);
    split_.resize(per_class());
    std::iota(split_.begin(), split_.end(), std::size_t{0});
    Rng rng(derive_seed(seed_, 0x73));
    rng.shuffle(split_);

    extractor_.emplace(make_registry(lab_, schemes_, opts_));
  }

  // Features: every registered scheme under every model's key.
  static FeatureRegistry make_registry(const Lab& lab, const std::vector<NamedScheme>& schemes,
                                       const BankOptions& opts) {
    FeatureRegistry reg;
    reg.models = lab.models;
    reg.synonyms = lab.synonyms;
    reg.histogram_size = opts.histogram_size;
    reg.scheme_features = opts.scheme_features;
    for (const auto& scheme : schemes) {
      for (const auto& m : lab.models) {
        SchemeConfig cfg = scheme.config;
        cfg.key = model_key(opts.secret, m->model_id());
        reg.schemes.push_back({scheme.name + "@" + m->model_id(), cfg});
      }
    }
    return reg;
  }

  const Lab& lab() const noexcept { return lab_; }
  const BankOptions& options() const noexcept { return opts_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<NamedScheme>& schemes() const noexcept { return schemes_; }
  std::size_t per_class() const noexcept { return opts_.train_per_class + opts_.test_per_class; }
  const std::vector<TokenSequence>& prompts() const noexcept { return prompts_; }
  std::vector<std::string> feature_layout() const { return extractor_->registry().layout(); }

  int scheme_index(const std::string& name) const {
    for (std::size_t s = 0; s < schemes_.size(); ++s) {
      if (schemes_[s].name == name) return static_cast<int>(s);
    }
    fail(ErrorCode::kInvalidParameter, "unknown scheme '" + name + "'");
  }

  SchemeConfig keyed_scheme(int scheme, std::size_t model) const {
    SchemeConfig cfg = schemes_.at(static_cast<std::size_t>(scheme)).config;
    cfg.key = model_key(opts_.secret, lab_.models.at(model)->model_id());
    return cfg;
  }

  // Stratified split: the same per-class permutation for every entry. The
  // first `train_size` (default all) training positions are returned.
  std::vector<std::size_t> train_indices(std::size_t train_size = 0) const {
    const std::size_t n = train_size == 0 ? opts_.train_per_class : train_size;
    require(n <= opts_.train_per_class, ErrorCode::kInvalidParameter,
            "train size exceeds the configured per-class training set");
    return {split_.begin(), split_.begin() + static_cast<std::ptrdiff_t>(n)};
  }
  std::vector<std::size_t> test_indices() const {
    return {split_.begin() + static_cast<std::ptrdiff_t>(opts_.train_per_class), split_.end()};
  }

  const std::vector<TokenSequence>& texts(std::size_t model, int scheme) {
    Entry& e = entry(model, scheme);
    if (e.texts.empty()) {
      const NGramModel& lm = *lab_.models.at(model);
      std::optional<Watermarker> wm;
      if (scheme != kNoScheme) wm.emplace(keyed_scheme(scheme, model), lm.vocab_size(), lab_.synonyms);
      e.texts.reserve(per_class());
      for (std::size_t j = 0; j < per_class(); ++j) {
        const std::uint64_t s = derive_seed(seed_, 0x67, model, j);
        e.texts.push_back(wm ? wm->generate(lm, prompts_[j], opts_.completion_length, s)
                             : generate(lm, prompts_[j], opts_.completion_length,
                                        Sampler::kMultinomial, s));
      }
    }
    return e.texts;
  }

  const std::vector<std::vector<double>>& features(std::size_t model, int scheme) {
    Entry& e = entry(model, scheme);
    if (e.features.empty()) {
      const auto& t = texts(model, scheme);
      e.features.reserve(t.size());
      for (const auto& text : t) e.features.push_back(extractor_->extract(text.ids));
    }
    return e.features;
  }

  // Evaluator perplexity of each completion given its prompt.
  const std::vector<double>& perplexities(std::size_t model, int scheme) {
    Entry& e = entry(model, scheme);
    if (e.perplexities.empty()) {
      const auto& t = texts(model, scheme);
      for (std::size_t j = 0; j < t.size(); ++j) {
        e.perplexities.push_back(perplexity(*lab_.evaluator, t[j].ids, prompts_[j].ids));
      }
    }
    return e.perplexities;
  }

 private:
  struct Entry {
    std::vector<TokenSequence> texts;
    std::vector<std::vector<double>> features;
    std::vector<double> perplexities;
  };

  Entry& entry(std::size_t model, int scheme) {
    require(model < lab_.models.size(), ErrorCode::kInvalidParameter, "model index out of range");
    require(scheme >= kNoScheme && scheme < static_cast<int>(schemes_.size()),
            ErrorCode::kInvalidParameter, "scheme index out of range");
    return entries_[{model, scheme}];
  }

  const Lab& lab_;
  std::vector<NamedScheme> schemes_;
  BankOptions opts_;
  std::uint64_t seed_;
  std::vector<TokenSequence> prompts_;
  std::vector<std::size_t> split_;
  std::optional<FeatureExtractor> extractor_;
  std::map<std::pair<std::size_t, int>, Entry> entries_;
};

struct ScenarioResult {
  EvalMetrics metrics;
  std::size_t train_per_class = 0;
  std::size_t test_per_class = 0;
};

// Trains on the bank's training split (optionally its first `train_size`
// positions per class) and evaluates on the full test split.
inline ScenarioResult run_scenario(const ScenarioSpec& spec, TextBank& bank,
                                   std::size_t train_size = 0) {
  spec.validate();
  const int scheme = spec.scheme ? bank.scheme_index(*spec.scheme) : kNoScheme;
  const auto train_idx = bank.train_indices(train_size);
  const auto test_idx = bank.test_indices();
  std::vector<LabeledExample> train, test;
  for (const auto& id : spec.models) {
    const std::size_t m = bank.lab().model_index(id);
    const auto& feats = bank.features(m, spec.is_watermarked(id) ? scheme : kNoScheme);
    for (std::size_t j : train_idx) train.push_back({feats[j], id});
    for (std::size_t j : test_idx) test.push_back({feats[j], id});
  }
  TrainOptions topts = bank.options().train;
  topts.rng_seed = derive_seed(bank.seed(), 0x74);
  const ClassifierModel model = train_classifier(train, topts);
  return {evaluate(model, test), train_idx.size(), test_idx.size()};
}

}  // namespace wmlab
