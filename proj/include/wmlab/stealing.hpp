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

// Model stealing by n-gram distillation, and the key owner's check for
// watermark signal in the stolen model.

#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/synonyms.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

struct StealingConfig {
  std::size_t num_queries = 200;
  std::size_t completion_length = 200;
  int surrogate_order = 2;
  double surrogate_smoothing = 0.01;
  std::optional<SchemeConfig> victim_scheme;

  void validate() const {
    require(num_queries >= 1, ErrorCode::kInvalidParameter, "num_queries must be >= 1");
    require(completion_length >= 1, ErrorCode::kInvalidParameter,
            "completion_length must be >= 1");
    require(surrogate_order >= 1 && surrogate_order <= kMaxOrder, ErrorCode::kInvalidParameter,
            "surrogate_order must be in [1, " + std::to_string(kMaxOrder) + "]");
    require(surrogate_smoothing > 0.0, ErrorCode::kInvalidParameter,
            "surrogate_smoothing must be positive");
    if (victim_scheme) victim_scheme->validate();
  }
};

// Picks `count` prompts from `pool` in a seed-determined order.
inline std::vector<std::size_t> choose_prompts(std::size_t pool_size, std::size_t count,
                                               std::uint64_t rng_seed) {
  require(count <= pool_size, ErrorCode::kInsufficientPrompts,
          "requested " + std::to_string(count) + " prompts but the source holds " +
              std::to_string(pool_size));
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(rng_seed);
  rng.shuffle(order);
  order.resize(count);
  return order;
}

// The victim's answers to the attacker's queries.
inline std::vector<TokenSequence> query_victim(const NGramModel& victim,
                                               std::span<const TokenSequence> prompts,
                                               const StealingConfig& cfg,
                                               std::uint64_t rng_seed,
                                               std::shared_ptr<const SynonymTable> synonyms = nullptr) {
  cfg.validate();
  const auto picked = choose_prompts(prompts.size(), cfg.num_queries, derive_seed(rng_seed, 1));
  std::optional<Watermarker> wm;
  if (cfg.victim_scheme) wm.emplace(*cfg.victim_scheme, victim.vocab_size(), std::move(synonyms));
  std::vector<TokenSequence> answers;
  answers.reserve(picked.size());
  for (std::size_t q = 0; q < picked.size(); ++q) {
    const std::uint64_t seed = derive_seed(rng_seed, 2, q);
    const TokenSequence& prompt = prompts[picked[q]];
    answers.push_back(wm ? wm->generate(victim, prompt, cfg.completion_length, seed)
                         : generate(victim, prompt, cfg.completion_length, Sampler::kMultinomial,
                                    seed));
  }
  return answers;
}

// Surrogate trained on the concatenated completions. Query seeds depend only
// on `rng_seed`, so clean and watermarked thefts with one seed are paired.
inline NGramModel steal(const NGramModel& victim, std::span<const TokenSequence> prompts,
                        const StealingConfig& cfg, std::uint64_t rng_seed,
                        std::shared_ptr<const SynonymTable> synonyms = nullptr) {
  const auto answers = query_victim(victim, prompts, cfg, rng_seed, std::move(synonyms));
  std::vector<std::span<const TokenId>> docs;
  docs.reserve(answers.size());
  for (const auto& a : answers) docs.emplace_back(a.ids);
  return train_ngram_documents(victim.shared_vocab(), docs, cfg.surrogate_order,
                               cfg.surrogate_smoothing, victim.model_id() + "-surrogate");
}

struct RadioactivityOptions {
  std::size_t num_probes = 50;
  std::size_t probe_length = 200;
  double flag_rate_threshold = kDefaultFlagRateThreshold;
  DetectorOptions detector;
};

// Probes the surrogate without watermarking and aggregates the matching
// detector's verdicts over its outputs.
inline ModelVerdict radioactivity_check(const NGramModel& surrogate, const SchemeConfig& scheme,
                                        std::span<const TokenSequence> prompts,
                                        const RadioactivityOptions& opts, std::uint64_t rng_seed,
                                        std::shared_ptr<const SynonymTable> synonyms = nullptr) {
  require(opts.num_probes >= 10, ErrorCode::kInvalidParameter,
          "radioactivity check needs >= 10 probes, got " + std::to_string(opts.num_probes));
  const auto picked = choose_prompts(prompts.size(), opts.num_probes, derive_seed(rng_seed, 3));
  Detector detector(scheme, surrogate.vocab_size(), std::move(synonyms), opts.detector);
  std::vector<DetectionResult> results;
  results.reserve(picked.size());
  for (std::size_t p = 0; p < picked.size(); ++p) {
    const auto probe = generate(surrogate, prompts[picked[p]], opts.probe_length,
                                Sampler::kMultinomial, derive_seed(rng_seed, 4, p));
    results.push_back(detector.detect(probe.ids, derive_seed(rng_seed, 5, p)));
  }
  return flag_model(results, opts.flag_rate_threshold);
}

}  // namespace wmlab
