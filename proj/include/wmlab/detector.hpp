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

// Key-holder watermark checkers.
//
// Logit family: count hits g among the T = |text| - h scored tokens and test
//   z = (g - gamma T) / sqrt(T gamma (1 - gamma))
// against a fixed threshold (SIR-lite counts positive-sign tokens, gamma 0.5).
//
// EXP: alignment cost of the text against the key sequence, optionally edit
// tolerant, ranked against the costs under freshly keyed decoy sequences.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/random.hpp"
#include "wmlab/synonyms.hpp"
#include "wmlab/text.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

inline constexpr double kDefaultZThreshold = 4.0;
inline constexpr double kDefaultAlpha = 0.01;
inline constexpr double kDefaultFlagRateThreshold = 0.25;

struct DetectionResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double threshold = 0.0;
  bool is_watermarked = false;
  std::size_t tokens_scored = 0;
  std::string scheme;
};

struct ModelVerdict {
  std::size_t outputs_tested = 0;
  std::size_t outputs_flagged = 0;
  double flag_rate = 0.0;
  bool model_flagged = false;
  double flag_rate_threshold = 0.0;
};

// One-sided upper normal tail.
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double binomial_z(std::size_t hits, std::size_t trials, double rate) {
  const double t = static_cast<double>(trials);
  return (static_cast<double>(hits) - rate * t) / std::sqrt(t * rate * (1.0 - rate));
}

inline DetectionResult z_result(std::size_t hits, std::size_t trials, double rate,
                                double z_threshold, std::string scheme) {
  DetectionResult r;
  r.statistic = binomial_z(hits, trials, rate);
  r.p_value = normal_upper_tail(r.statistic);
  r.threshold = z_threshold;
  r.is_watermarked = r.statistic >= z_threshold;
  r.tokens_scored = trials;
  r.scheme = std::move(scheme);
  return r;
}

// Counts detector hits using a caller-owned Watermarker (reuses its caches).
inline std::size_t count_hits(Watermarker& wm, std::span<const TokenId> text) {
  const auto h = static_cast<std::size_t>(wm.scheme().window());
  std::size_t hits = 0;
  for (std::size_t j = h; j < text.size(); ++j) {
    hits += wm.is_hit(text.first(j), text[j]) ? 1 : 0;
  }
  return hits;
}

inline DetectionResult green_fraction_test(Watermarker& wm, std::span<const TokenId> text,
                                           double z_threshold = kDefaultZThreshold) {
  const SchemeConfig& scheme = wm.scheme();
  require(scheme.is_logit_family(), ErrorCode::kInvalidParameter,
          "green-fraction test needs a KGW, Unigram or SIR-lite scheme");
  const auto h = static_cast<std::size_t>(scheme.window());
  require(text.size() >= h + 1, ErrorCode::kInsufficientText,
          "text of " + std::to_string(text.size()) + " tokens is too short for context width " +
              std::to_string(h));
  for (TokenId id : text) {
    require(id < wm.vocab_size(), ErrorCode::kInvalidInput, "token id out of vocabulary range");
  }
  return z_result(count_hits(wm, text), text.size() - h, scheme.null_rate(), z_threshold,
                  std::string(scheme_kind_name(scheme.kind)));
}

inline DetectionResult green_fraction_test(const TokenSequence& text, const SchemeConfig& scheme,
                                           std::size_t vocab_size,
                                           std::shared_ptr<const SynonymTable> synonyms = nullptr,
                                           double z_threshold = kDefaultZThreshold) {
  Watermarker wm(scheme, vocab_size, std::move(synonyms));
  return green_fraction_test(wm, text.ids, z_threshold);
}

struct AlignmentOptions {
  bool edit_tolerant = true;
  std::size_t band = 8;
  // Per-edit penalty; negative means calibrate from the key.
  double edit_penalty = -1.0;
  double alpha = kDefaultAlpha;
  // Minimize over every starting row of the key sequence.
  bool search_shifts = false;
};

// Per-token cost source for one key: c(row, token) = -log xi[row][token].
// Either owns a (lazily evaluated) key sequence or borrows a materialized one.
class AlignmentCost {
 public:
  AlignmentCost(WatermarkKey key, std::size_t n, std::size_t vocab_size)
      : owned_(std::in_place, key, n, vocab_size), keys_(&*owned_) {}
  explicit AlignmentCost(const ExpKeySequence& keys) : keys_(&keys) {}
  AlignmentCost(const AlignmentCost&) = delete;
  AlignmentCost& operator=(const AlignmentCost&) = delete;

  double operator()(std::size_t row, TokenId token) const { return keys_->neg_log_xi(row, token); }
  std::size_t n() const noexcept { return keys_->length(); }

 private:
  std::optional<ExpKeySequence> owned_;
  const ExpKeySequence* keys_;
};

// Sum over i of -log xi[start + i][y_i].
inline double plain_alignment_cost(const AlignmentCost& cost, std::span<const TokenId> text,
                                   std::size_t start = 0) {
  double total = 0.0;
  for (std::size_t i = 0; i < text.size(); ++i) total += cost(start + i, text[i]);
  return total;
}

// Minimum cost over monotone alignments of text positions to key rows where
// an unmatched text token or skipped key row costs `penalty`, restricted to
// |row - position| <= band. O(|text| band).
inline double banded_alignment_cost(const AlignmentCost& cost, std::span<const TokenId> text,
                                    std::size_t band, double penalty, std::size_t start = 0) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t width = 2 * band + 1;
  // cur[d] holds D[j][j + d - band].
  std::vector<double> cur(width, inf), next(width, inf);
  cur[band] = 0.0;
  const auto relax_deletions = [&](std::vector<double>& row) {
    for (std::size_t d = 1; d < width; ++d) row[d] = std::min(row[d], row[d - 1] + penalty);
  };
  relax_deletions(cur);
  const auto signed_band = static_cast<std::ptrdiff_t>(band);
  for (std::size_t j = 0; j < text.size(); ++j) {
    std::fill(next.begin(), next.end(), inf);
    for (std::size_t d = 0; d < width; ++d) {
      if (cur[d] == inf) continue;
      const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(d) - signed_band;
      if (r < 0) continue;
      // match: (j, r) -> (j+1, r+1), same offset
      next[d] = std::min(next[d], cur[d] + cost(start + static_cast<std::size_t>(r), text[j]));
      // unmatched text token: (j, r) -> (j+1, r), offset d-1
      if (d > 0) next[d - 1] = std::min(next[d - 1], cur[d] + penalty);
    }
    relax_deletions(next);
    std::swap(cur, next);
  }
  return *std::min_element(cur.begin(), cur.end());
}

inline double alignment_cost(const AlignmentCost& cost, std::span<const TokenId> text,
                             const AlignmentOptions& opts, double penalty) {
  const std::size_t starts = opts.search_shifts ? cost.n() : 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < starts; ++s) {
    const double c = opts.edit_tolerant ? banded_alignment_cost(cost, text, opts.band, penalty, s)
                                        : plain_alignment_cost(cost, text, s);
    best = std::min(best, c);
  }
  return best;
}

// Mean -log xi over random (row, token) pairs: the expected per-token cost of
// text that is independent of the key.
inline double calibrate_edit_penalty(WatermarkKey key, std::size_t n, std::size_t vocab_size,
                                     std::size_t samples = 4096) {
  const AlignmentCost cost(key, n, vocab_size);
  Rng rng(derive_seed(key.secret, 0xca1bULL));
  double total = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    total += cost(rng.below(n), static_cast<TokenId>(rng.below(vocab_size)));
  }
  return total / static_cast<double>(samples);
}

inline WatermarkKey decoy_key(std::uint64_t rng_seed, std::span<const TokenId> text,
                              std::size_t index) {
  return WatermarkKey{derive_seed(rng_seed, hash_ids(text), index)};
}

// Analytic EXP statistic without permutations: plain cost against the key is
// a sum of T unit exponentials under the null, so z = (T - cost) / sqrt(T).
inline double exp_plain_z(const AlignmentCost& cost, std::span<const TokenId> text) {
  if (text.empty()) return 0.0;
  const double t = static_cast<double>(text.size());
  return (t - plain_alignment_cost(cost, text)) / std::sqrt(t);
}

inline DetectionResult exp_alignment_test(std::span<const TokenId> text, WatermarkKey key,
                                          std::size_t n, std::size_t vocab_size,
                                          std::size_t num_permutations, std::uint64_t rng_seed,
                                          AlignmentOptions opts = {}) {
  require(!text.empty(), ErrorCode::kInsufficientText, "EXP test needs at least one token");
  require(num_permutations >= 20, ErrorCode::kInvalidParameter,
          "need at least 20 permutations, got " + std::to_string(num_permutations));
  require(n >= 1, ErrorCode::kInvalidParameter, "EXP key length must be >= 1");
  require(opts.alpha > 0.0 && opts.alpha < 1.0, ErrorCode::kInvalidParameter,
          "alpha must be in (0, 1)");
  for (TokenId id : text) {
    require(id < vocab_size, ErrorCode::kInvalidInput, "token id out of vocabulary range");
  }
  const double penalty =
      opts.edit_penalty >= 0.0 ? opts.edit_penalty : calibrate_edit_penalty(key, n, vocab_size);

  const double observed = alignment_cost(AlignmentCost(key, n, vocab_size), text, opts, penalty);
  std::vector<double> decoys(num_permutations);
  std::size_t at_or_below = 0;
  for (std::size_t d = 0; d < num_permutations; ++d) {
    decoys[d] = alignment_cost(AlignmentCost(decoy_key(rng_seed, text, d), n, vocab_size), text,
                               opts, penalty);
    at_or_below += decoys[d] <= observed ? 1 : 0;
  }
  const double mean = std::accumulate(decoys.begin(), decoys.end(), 0.0) /
                      static_cast<double>(decoys.size());
  double var = 0.0;
  for (double c : decoys) var += (c - mean) * (c - mean);
  const double sd = std::sqrt(var / static_cast<double>(decoys.size() - 1));

  DetectionResult r;
  r.statistic = sd > 0.0 ? (mean - observed) / sd : 0.0;
  r.p_value = static_cast<double>(1 + at_or_below) / static_cast<double>(num_permutations + 1);
  r.threshold = opts.alpha;
  r.is_watermarked = r.p_value <= opts.alpha;
  r.tokens_scored = text.size();
  r.scheme = std::string(scheme_kind_name(SchemeKind::kExp));
  return r;
}

inline ModelVerdict flag_model(std::span<const DetectionResult> results,
                               double flag_rate_threshold = kDefaultFlagRateThreshold) {
  require(!results.empty(), ErrorCode::kInvalidInput, "no detection results to aggregate");
  ModelVerdict v;
  v.outputs_tested = results.size();
  for (const auto& r : results) v.outputs_flagged += r.is_watermarked ? 1 : 0;
  v.flag_rate = static_cast<double>(v.outputs_flagged) / static_cast<double>(v.outputs_tested);
  v.flag_rate_threshold = flag_rate_threshold;
  v.model_flagged = v.flag_rate >= flag_rate_threshold;
  return v;
}

struct DetectorOptions {
  double z_threshold = kDefaultZThreshold;
  std::size_t num_permutations = 100;
  AlignmentOptions alignment;
};

// Scheme-dispatching checker for batches of texts.
class Detector {
 public:
  Detector(const SchemeConfig& scheme, std::size_t vocab_size,
           std::shared_ptr<const SynonymTable> synonyms = nullptr, DetectorOptions opts = {})
      : wm_(scheme, vocab_size, std::move(synonyms)), opts_(opts) {
    if (scheme.kind == SchemeKind::kExp) {
      opts_.alignment.search_shifts = opts_.alignment.search_shifts || scheme.exp_random_shift;
      if (opts_.alignment.edit_penalty < 0.0) {
        opts_.alignment.edit_penalty = calibrate_edit_penalty(
            scheme.key, static_cast<std::size_t>(scheme.exp_key_length), vocab_size);
      }
    }
  }

  const SchemeConfig& scheme() const noexcept { return wm_.scheme(); }
  Watermarker& watermarker() noexcept { return wm_; }

  // `rng_seed` feeds the EXP decoy keys.
  DetectionResult detect(std::span<const TokenId> text, std::uint64_t rng_seed = 0) {
    const SchemeConfig& s = wm_.scheme();
    if (s.is_logit_family()) return green_fraction_test(wm_, text, opts_.z_threshold);
    return exp_alignment_test(text, s.key, static_cast<std::size_t>(s.exp_key_length),
                              wm_.vocab_size(), opts_.num_permutations, rng_seed,
                              opts_.alignment);
  }

  // Cheap per-text score: z for the logit family, exp_plain_z for EXP.
  double score(std::span<const TokenId> text) {
    const SchemeConfig& s = wm_.scheme();
    if (s.is_logit_family()) {
      const auto h = static_cast<std::size_t>(s.window());
      if (text.size() <= h) return 0.0;
      return binomial_z(count_hits(wm_, text), text.size() - h, s.null_rate());
    }
    return exp_plain_z(AlignmentCost(wm_.exp_keys()), text);
  }

 private:
  Watermarker wm_;
  DetectorOptions opts_;
};

}  // namespace wmlab
