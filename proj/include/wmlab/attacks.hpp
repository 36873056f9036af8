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

// Token-level watermark removal attacks. None of them sees a watermark key.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/synonyms.hpp"
#include "wmlab/text.hpp"

namespace wmlab {

enum class AttackKind { kSubstitution, kParaphrase, kRemoval };

inline std::string_view attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kSubstitution: return "substitution";
    case AttackKind::kParaphrase: return "paraphrase";
    case AttackKind::kRemoval: return "removal";
  }
  return "?";
}

inline AttackKind parse_attack_kind(std::string_view name) {
  if (name == "substitution") return AttackKind::kSubstitution;
  if (name == "paraphrase" || name == "dipper") return AttackKind::kParaphrase;
  if (name == "removal" || name == "wmremoval") return AttackKind::kRemoval;
  fail(ErrorCode::kInvalidParameter, "unknown attack '" + std::string(name) + "'");
}

struct AttackConfig {
  AttackKind kind = AttackKind::kSubstitution;
  double edit_rate = 0.3;
  std::size_t window = 8;
  double perplexity_budget = 2.0;
  std::uint64_t rng_seed = 0;

  static AttackConfig substitution(double rate = 0.3) {
    return {AttackKind::kSubstitution, rate, 8, 2.0, 0};
  }
  static AttackConfig paraphrase(std::size_t window = 8, double rate = 0.5) {
    return {AttackKind::kParaphrase, rate, window, 2.0, 0};
  }
  static AttackConfig removal(double budget = 2.0) {
    return {AttackKind::kRemoval, 0.0, 8, budget, 0};
  }

  void validate() const {
    switch (kind) {
      case AttackKind::kSubstitution:
        require(edit_rate >= 0.0 && edit_rate <= 1.0, ErrorCode::kInvalidParameter,
                "edit_rate must be in [0, 1]");
        break;
      case AttackKind::kParaphrase:
        require(edit_rate >= 0.0 && edit_rate <= 1.0, ErrorCode::kInvalidParameter,
                "edit_rate must be in [0, 1]");
        require(window >= 2, ErrorCode::kInvalidParameter, "paraphrase window must be >= 2");
        break;
      case AttackKind::kRemoval:
        require(perplexity_budget >= 1.0, ErrorCode::kInvalidParameter,
                "perplexity budget must be >= 1");
        break;
    }
  }
};

inline TokenSequence substitution_attack(const TokenSequence& text, const SynonymTable& table,
                                         double edit_rate, std::uint64_t rng_seed) {
  require(edit_rate >= 0.0 && edit_rate <= 1.0, ErrorCode::kInvalidParameter,
          "edit_rate must be in [0, 1]");
  TokenSequence out = text;
  Rng rng(rng_seed);
  for (TokenId& id : out.ids) {
    if (!rng.bernoulli(edit_rate)) continue;
    const auto members = table.members(table.class_of(id));
    id = members[rng.below(members.size())];
  }
  return out;
}

inline TokenSequence paraphrase_attack(const TokenSequence& text, std::size_t window,
                                       double edit_rate, const SynonymTable& table,
                                       std::uint64_t rng_seed) {
  require(window >= 2, ErrorCode::kInvalidParameter, "paraphrase window must be >= 2");
  require(edit_rate >= 0.0 && edit_rate <= 1.0, ErrorCode::kInvalidParameter,
          "edit_rate must be in [0, 1]");
  TokenSequence out = text;
  Rng rng(rng_seed);
  for (std::size_t begin = 0; begin < out.ids.size(); begin += window) {
    const std::size_t len = std::min(window, out.ids.size() - begin);
    if (rng.bernoulli(edit_rate)) rng.shuffle(std::span<TokenId>(out.ids).subspan(begin, len));
  }
  return substitution_attack(out, table, edit_rate / 2.0, derive_seed(rng_seed, 0x5b5ULL));
}

// Greedy key-free removal.
//
// The attacker's proxy for "watermark still present" is the number of the
// original text's (previous, current) token transitions that survive in the
// edited text; context-keyed watermarks live in exactly those pairs. Visiting
// positions in random order, each same-class substitute is scored by how many
// surviving transitions it breaks, ties going to the substitute the reference
// model finds most likely after the current previous token. The best
// substitute is kept if the text's reference perplexity stays within
// `budget` times the original.
inline TokenSequence removal_attack(const TokenSequence& text, const NGramModel& reference_lm,
                                    const SynonymTable& table, double perplexity_budget,
                                    std::uint64_t rng_seed,
                                    std::span<const TokenId> prefix = {}) {
  require(perplexity_budget >= 1.0, ErrorCode::kInvalidParameter,
          "perplexity budget must be >= 1");
  TokenSequence out = text;
  const std::size_t len = text.size();
  if (len == 0) return out;
  const std::vector<TokenId>& original = text.ids;
  std::vector<TokenId> full(prefix.begin(), prefix.end());
  const std::size_t offset = full.size();
  full.insert(full.end(), original.begin(), original.end());

  const auto log_prob_at = [&](std::size_t i) {
    return std::log(reference_lm.probability(std::span<const TokenId>(full).first(offset + i),
                                             full[offset + i]));
  };
  std::vector<double> logp(len);
  for (std::size_t i = 0; i < len; ++i) logp[i] = log_prob_at(i);
  const double base_nll = -std::accumulate(logp.begin(), logp.end(), 0.0);
  // perplexity' <= budget * perplexity  <=>  nll' <= nll + len log(budget)
  const double nll_limit = std::isinf(perplexity_budget)
                               ? std::numeric_limits<double>::infinity()
                               : base_nll + static_cast<double>(len) * std::log(perplexity_budget);
  double nll = base_nll;

  const auto order = static_cast<std::size_t>(reference_lm.order());
  const auto transition_kept = [&](std::size_t i) {
    // transition into position i
    if (i == 0 || i >= len) return false;
    return full[offset + i - 1] == original[i - 1] && full[offset + i] == original[i];
  };

  std::vector<std::size_t> positions(len);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  Rng rng(rng_seed);
  rng.shuffle(positions);

  for (std::size_t i : positions) {
    const TokenId current = full[offset + i];
    const auto members = table.members(table.class_of(current));
    if (members.size() < 2) continue;
    const std::size_t affected_end = std::min(len, i + order);
    const int kept_before = (transition_kept(i) ? 1 : 0) + (transition_kept(i + 1) ? 1 : 0);

    TokenId best = current;
    int best_gain = 0;
    double best_pair_logp = -std::numeric_limits<double>::infinity();
    double best_nll = nll;
    std::vector<double> best_logp;
    std::vector<double> trial(affected_end - i);
    for (TokenId candidate : members) {
      if (candidate == current) continue;
      full[offset + i] = candidate;
      const int kept_after = (transition_kept(i) ? 1 : 0) + (transition_kept(i + 1) ? 1 : 0);
      const int gain = kept_before - kept_after;
      double delta_nll = 0.0;
      for (std::size_t j = i; j < affected_end; ++j) {
        trial[j - i] = log_prob_at(j);
        delta_nll -= trial[j - i] - logp[j];
      }
      const double candidate_nll = nll + delta_nll;
      if (candidate_nll <= nll_limit) {
        const double pair_logp = trial[0];
        if (gain > best_gain || (gain == best_gain && gain > 0 && pair_logp > best_pair_logp)) {
          best = candidate;
          best_gain = gain;
          best_pair_logp = pair_logp;
          best_nll = candidate_nll;
          best_logp = trial;
        }
      }
    }
    full[offset + i] = best;
    if (best != current) {
      for (std::size_t j = i; j < affected_end; ++j) logp[j] = best_logp[j - i];
      nll = best_nll;
    }
  }
  out.ids.assign(full.begin() + static_cast<std::ptrdiff_t>(offset), full.end());
  return out;
}

inline TokenSequence apply_attack(const TokenSequence& text, const AttackConfig& cfg,
                                  const SynonymTable& table, const NGramModel* reference_lm,
                                  std::span<const TokenId> prefix = {}) {
  cfg.validate();
  switch (cfg.kind) {
    case AttackKind::kSubstitution:
      return substitution_attack(text, table, cfg.edit_rate, cfg.rng_seed);
    case AttackKind::kParaphrase:
      return paraphrase_attack(text, cfg.window, cfg.edit_rate, table, cfg.rng_seed);
    case AttackKind::kRemoval:
      require(reference_lm != nullptr, ErrorCode::kInvalidParameter,
              "removal attack needs a reference language model");
      return removal_attack(text, *reference_lm, table, cfg.perplexity_budget, cfg.rng_seed,
                            prefix);
  }
  fail(ErrorCode::kInvalidParameter, "unknown attack kind");
}

// Fraction of texts flagged before the attack and not flagged after it.
// Returns 0 when nothing was flagged before.
inline double attack_success_rate(std::span<const DetectionResult> pre,
                                  std::span<const DetectionResult> post) {
  require(pre.size() == post.size(), ErrorCode::kInvalidInput,
          "pre/post result counts differ: " + std::to_string(pre.size()) + " vs " +
              std::to_string(post.size()));
  std::size_t flagged = 0, evaded = 0;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!pre[i].is_watermarked) continue;
    ++flagged;
    evaded += post[i].is_watermarked ? 0 : 1;
  }
  return flagged == 0 ? 0.0 : static_cast<double>(evaded) / static_cast<double>(flagged);
}

}  // namespace wmlab
