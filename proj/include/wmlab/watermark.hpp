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

// Watermark generators.
//
// Logit-bias family:
//   KGW      green list re-drawn per position from a hash of the previous h
//            tokens; green logits get +delta.
//   Unigram  one global green list (KGW with an empty context window).
//   SIR-lite each token's sign (+delta / -delta) is a keyed function of its
//            synonym class and of the multiset of synonym classes in the
//            previous h tokens.
//
// Sampling family:
//   EXP      position i picks argmax_v xi[i mod n][v]^(1/p[v]) where xi is a
//            keyed uniform sequence. Marginally this is an exact sample from p.
//
// Green lists have exactly round(gamma |V|) members: the tokens with the
// smallest prf(secret, hash(window), id) values, ties broken by id.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/synonyms.hpp"
#include "wmlab/text.hpp"

namespace wmlab {

enum class SchemeKind { kKgw, kUnigram, kSirLite, kExp };

inline std::string_view scheme_kind_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kKgw: return "KGW";
    case SchemeKind::kUnigram: return "Unigram";
    case SchemeKind::kSirLite: return "SIR-lite";
    case SchemeKind::kExp: return "EXP";
  }
  return "?";
}

inline SchemeKind parse_scheme_kind(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "kgw") return SchemeKind::kKgw;
  if (lower == "unigram") return SchemeKind::kUnigram;
  if (lower == "sir-lite" || lower == "sirlite") return SchemeKind::kSirLite;
  if (lower == "exp") return SchemeKind::kExp;
  fail(ErrorCode::kInvalidParameter, "unknown watermark scheme '" + std::string(name) + "'");
}

struct WatermarkKey {
  std::uint64_t secret = 0;
  bool operator==(const WatermarkKey&) const = default;
};

inline constexpr int kDefaultSirLiteWidth = 4;

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kKgw;
  double gamma = 0.25;
  double delta = 2.0;
  int context_width = 1;
  WatermarkKey key;
  int exp_key_length = 256;
  // SIR-lite only. 0 selects the shared frequency-bucket synonym table;
  // otherwise classes are id mod num_synonym_classes.
  int num_synonym_classes = 0;
  // EXP only. When set, each generation starts at a seed-derived row of the
  // key sequence and detection searches over all starting rows.
  bool exp_random_shift = false;

  static SchemeConfig kgw(WatermarkKey key, double gamma = 0.25, double delta = 2.0, int h = 1) {
    return SchemeConfig{SchemeKind::kKgw, gamma, delta, h, key};
  }
  static SchemeConfig unigram(WatermarkKey key, double gamma = 0.25, double delta = 2.0) {
    return SchemeConfig{SchemeKind::kUnigram, gamma, delta, 0, key};
  }
  static SchemeConfig sirlite(WatermarkKey key, double delta = 2.0,
                              int h = kDefaultSirLiteWidth) {
    return SchemeConfig{SchemeKind::kSirLite, 0.5, delta, h, key};
  }
  static SchemeConfig exp(WatermarkKey key, int n = 256) {
    SchemeConfig cfg{SchemeKind::kExp, 0.5, 0.0, 0, key};
    cfg.exp_key_length = n;
    return cfg;
  }

  bool is_logit_family() const noexcept { return kind != SchemeKind::kExp; }

  // Tokens of preceding context the scheme conditions on. Also the number of
  // leading completion tokens the detector leaves unscored.
  int window() const noexcept {
    switch (kind) {
      case SchemeKind::kKgw:
      case SchemeKind::kSirLite: return context_width;
      case SchemeKind::kUnigram:
      case SchemeKind::kExp: return 0;
    }
    return 0;
  }

  // Green fraction under the null hypothesis.
  double null_rate() const noexcept { return kind == SchemeKind::kSirLite ? 0.5 : gamma; }

  void validate() const {
    if (kind != SchemeKind::kExp) {
      require(gamma > 0.0 && gamma < 1.0, ErrorCode::kInvalidParameter,
              "gamma must be in (0, 1), got " + std::to_string(gamma));
      require(delta >= 0.0 && std::isfinite(delta), ErrorCode::kInvalidParameter,
              "delta must be >= 0");
    }
    if (kind == SchemeKind::kKgw || kind == SchemeKind::kSirLite) {
      require(context_width >= 1, ErrorCode::kInvalidParameter,
              std::string(scheme_kind_name(kind)) + " requires context width h >= 1");
    }
    if (kind == SchemeKind::kExp) {
      require(exp_key_length >= 1, ErrorCode::kInvalidParameter, "EXP key length must be >= 1");
    }
    if (kind == SchemeKind::kSirLite) {
      require(num_synonym_classes == 0 || num_synonym_classes >= 2, ErrorCode::kInvalidParameter,
              "SIR-lite needs at least 2 synonym classes");
    }
  }
};

// BOS-padded copy of the last `h` ids of `history`.
inline std::vector<TokenId> context_window(std::span<const TokenId> history, int h) {
  std::vector<TokenId> window(static_cast<std::size_t>(std::max(h, 0)), kBosId);
  const std::size_t take = std::min(window.size(), history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            window.end() - static_cast<std::ptrdiff_t>(take));
  return window;
}

class GreenPartition {
 public:
  GreenPartition() = default;
  GreenPartition(std::size_t vocab_size, double gamma)
      : bits_((vocab_size + 63) / 64, 0), vocab_size_(vocab_size), gamma_(gamma) {}

  bool is_green(TokenId id) const noexcept {
    return id < vocab_size_ && ((bits_[id >> 6] >> (id & 63)) & 1u);
  }
  void set_green(TokenId id) {
    if (!is_green(id)) ++green_count_;
    bits_[id >> 6] |= std::uint64_t{1} << (id & 63);
  }

  std::size_t green_count() const noexcept { return green_count_; }
  std::span<const std::uint64_t> words() const noexcept { return bits_; }

  // Calls f(id) for each green id in increasing order.
  template <typename F>
  void for_each_green(F&& f) const {
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      for (std::uint64_t b = bits_[w]; b != 0; b &= b - 1) {
        f(static_cast<TokenId>(w * 64 + static_cast<std::size_t>(std::countr_zero(b))));
      }
    }
  }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  double gamma() const noexcept { return gamma_; }

  std::vector<TokenId> green_ids() const {
    std::vector<TokenId> ids;
    ids.reserve(green_count_);
    for (std::size_t v = 0; v < vocab_size_; ++v) {
      if (is_green(static_cast<TokenId>(v))) ids.push_back(static_cast<TokenId>(v));
    }
    return ids;
  }

  bool operator==(const GreenPartition&) const = default;

 private:
  std::vector<std::uint64_t> bits_;
  std::size_t vocab_size_ = 0;
  std::size_t green_count_ = 0;
  double gamma_ = 0.0;
};

inline std::size_t green_list_size(double gamma, std::size_t vocab_size) {
  return static_cast<std::size_t>(std::llround(gamma * static_cast<double>(vocab_size)));
}

// `window` is hashed as given; callers pad it with context_window().
inline GreenPartition kgw_partition(WatermarkKey key, std::span<const TokenId> window,
                                    double gamma, std::size_t vocab_size) {
  require(gamma > 0.0 && gamma < 1.0, ErrorCode::kInvalidParameter,
          "gamma must be in (0, 1), got " + std::to_string(gamma));
  require(vocab_size >= 1, ErrorCode::kInvalidParameter, "empty vocabulary");
  const std::uint64_t ctx = hash_ids(window);
  const std::size_t m = green_list_size(gamma, vocab_size);
  std::vector<std::pair<std::uint64_t, TokenId>> scored(vocab_size);
  for (std::size_t v = 0; v < vocab_size; ++v) {
    scored[v] = {prf(key.secret, ctx, v), static_cast<TokenId>(v)};
  }
  GreenPartition partition(vocab_size, gamma);
  if (m > 0) {
    std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m - 1),
                     scored.end());
    for (std::size_t i = 0; i < m; ++i) partition.set_green(scored[i].second);
  }
  return partition;
}

inline GreenPartition unigram_partition(WatermarkKey key, double gamma, std::size_t vocab_size) {
  return kgw_partition(key, {}, gamma, vocab_size);
}

// Memoizes partitions by context window. Not thread-safe; use one per thread.
class PartitionCache {
 public:
  PartitionCache(WatermarkKey key, double gamma, std::size_t vocab_size, int width)
      : key_(key), gamma_(gamma), vocab_size_(vocab_size), width_(width) {}

  const GreenPartition& for_history(std::span<const TokenId> history) {
    const auto window = context_window(history, width_);
    const std::uint64_t h = hash_ids(window);
    auto it = cache_.find(h);
    if (it == cache_.end()) {
      it = cache_.emplace(h, kgw_partition(key_, window, gamma_, vocab_size_)).first;
    }
    return it->second;
  }

  std::size_t size() const noexcept { return cache_.size(); }

 private:
  WatermarkKey key_;
  double gamma_;
  std::size_t vocab_size_;
  int width_;
  std::unordered_map<std::uint64_t, GreenPartition> cache_;
};

// Order-free hash of the synonym classes in `window`.
inline std::uint64_t class_multiset_hash(std::span<const TokenId> window,
                                         const SynonymTable& table) {
  std::vector<TokenId> classes;
  classes.reserve(window.size());
  for (TokenId id : window) classes.push_back(table.class_of(id));
  std::sort(classes.begin(), classes.end());
  return hash_ids(classes) ^ 0x5851f42d4c957f2dULL;
}

// One PRF output supplies the signs of 64 consecutive classes.
inline bool sirlite_class_positive(WatermarkKey key, std::uint64_t multiset_hash,
                                   std::uint32_t cls) {
  return ((prf(key.secret, multiset_hash, cls >> 6) >> (cls & 63)) & 1u) != 0;
}

// +delta / -delta per token. All members of a synonym class share a sign.
inline std::vector<double> sirlite_bias_vector(WatermarkKey key, std::span<const TokenId> window,
                                               const SynonymTable& table, double delta) {
  require(table.num_classes() >= 2, ErrorCode::kInvalidParameter,
          "SIR-lite needs at least 2 synonym classes");
  const std::uint64_t ms = class_multiset_hash(window, table);
  std::vector<double> class_bias(table.num_classes());
  for (std::size_t c = 0; c < class_bias.size(); ++c) {
    class_bias[c] = sirlite_class_positive(key, ms, static_cast<std::uint32_t>(c)) ? delta : -delta;
  }
  std::vector<double> bias(table.vocab_size());
  for (std::size_t v = 0; v < bias.size(); ++v) {
    bias[v] = class_bias[table.class_of(static_cast<TokenId>(v))];
  }
  return bias;
}

inline std::vector<double> sirlite_bias_vector(WatermarkKey key, std::span<const TokenId> window,
                                               std::size_t num_classes, double delta,
                                               std::size_t vocab_size) {
  return sirlite_bias_vector(key, window, SynonymTable::modulo(vocab_size, num_classes), delta);
}

inline std::vector<double> bias_logits(std::span<const double> logits,
                                       const GreenPartition& partition, double delta) {
  require(logits.size() == partition.vocab_size(), ErrorCode::kInvalidInput,
          "logits length " + std::to_string(logits.size()) + " != partition size " +
              std::to_string(partition.vocab_size()));
  std::vector<double> out(logits.begin(), logits.end());
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (partition.is_green(static_cast<TokenId>(v))) out[v] += delta;
  }
  return out;
}

// Adds a precomputed per-token bias (SIR-lite).
inline std::vector<double> bias_logits(std::span<const double> logits,
                                       std::span<const double> bias) {
  require(logits.size() == bias.size(), ErrorCode::kInvalidInput,
          "logits and bias vector lengths differ");
  std::vector<double> out(logits.begin(), logits.end());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] += bias[v];
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  require(!logits.empty(), ErrorCode::kInvalidInput, "softmax of empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) total += out[i] = std::exp(logits[i] - mx);
  for (double& x : out) x /= total;
  return out;
}

inline constexpr std::uint64_t kExpRowDomain = 0xe4c0000000000000ULL;

// Keyed sequence of n rows of |V| uniforms in (0, 1). Position i of a
// generation reads row (i + shift) mod n.
class ExpKeySequence {
 public:
  ExpKeySequence(WatermarkKey key, std::size_t n, std::size_t vocab_size)
      : key_(key), n_(n), vocab_size_(vocab_size) {
    require(n >= 1, ErrorCode::kInvalidParameter, "EXP key length must be >= 1");
  }

  std::size_t length() const noexcept { return n_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  WatermarkKey key() const noexcept { return key_; }

  double xi(std::size_t row, TokenId v) const {
    return bits_to_open_unit(prf(key_.secret, kExpRowDomain + (row % n_), v));
  }

  double neg_log_xi(std::size_t row, TokenId v) const {
    if (!table_.empty()) return table_[(row % n_) * vocab_size_ + v];
    return -std::log(xi(row, v));
  }

  std::vector<double> row(std::size_t r) const {
    std::vector<double> out(vocab_size_);
    for (std::size_t v = 0; v < vocab_size_; ++v) out[v] = xi(r, static_cast<TokenId>(v));
    return out;
  }

  // Precomputes -log xi for every entry; n |V| doubles.
  void materialize() {
    if (!table_.empty()) return;
    table_.resize(n_ * vocab_size_);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t v = 0; v < vocab_size_; ++v) {
        table_[r * vocab_size_ + v] = -std::log(xi(r, static_cast<TokenId>(v)));
      }
    }
  }

  std::span<const double> neg_log_row(std::size_t r) const {
    require(!table_.empty(), ErrorCode::kInvalidInput, "key sequence not materialized");
    return std::span<const double>(table_).subspan((r % n_) * vocab_size_, vocab_size_);
  }

 private:
  WatermarkKey key_;
  std::size_t n_;
  std::size_t vocab_size_;
  std::vector<double> table_;
};

// argmin over p[v] > 0 of (-log xi[v]) / p[v]; ties go to the lowest id.
inline TokenId exp_sample_neg_log(std::span<const double> probabilities,
                                  std::span<const double> neg_log_xi) {
  require(probabilities.size() == neg_log_xi.size(), ErrorCode::kInvalidInput,
          "probability and key row lengths differ");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_id = probabilities.size();
  for (std::size_t v = 0; v < probabilities.size(); ++v) {
    const double p = probabilities[v];
    if (!(p > 0.0)) continue;
    const double score = neg_log_xi[v] / p;
    if (score < best || best_id == probabilities.size()) {
      best = score;
      best_id = v;
    }
  }
  require(best_id < probabilities.size(), ErrorCode::kInvalidInput,
          "probability vector has no positive entry");
  return static_cast<TokenId>(best_id);
}

// argmax_v xi[v]^(1/p[v]), evaluated in log space.
inline TokenId exp_sample(std::span<const double> probabilities, std::span<const double> xi_row) {
  require(probabilities.size() == xi_row.size(), ErrorCode::kInvalidInput,
          "probability and key row lengths differ");
  std::vector<double> neg_log(xi_row.size());
  for (std::size_t v = 0; v < xi_row.size(); ++v) {
    require(xi_row[v] > 0.0 && xi_row[v] < 1.0, ErrorCode::kInvalidInput,
            "key entries must lie in (0, 1)");
    neg_log[v] = -std::log(xi_row[v]);
  }
  return exp_sample_neg_log(probabilities, neg_log);
}

inline std::size_t exp_start_row(const SchemeConfig& scheme, std::uint64_t rng_seed) {
  if (!scheme.exp_random_shift) return 0;
  return static_cast<std::size_t>(prf(scheme.key.secret, 0x5817f7ULL, rng_seed) %
                                  static_cast<std::uint64_t>(scheme.exp_key_length));
}

// Per-step record of what the generator favored, for consistency checks.
struct GenerationTrace {
  // KGW/Unigram: green ids. SIR-lite: ids with a positive sign. EXP: empty.
  std::vector<std::vector<TokenId>> favored;
  std::vector<std::size_t> key_rows;  // EXP only
};

// Stateful generator for one scheme. Holds partition caches and the
// materialized EXP key table, so reuse it across generations. Not
// thread-safe.
class Watermarker {
 public:
  Watermarker(SchemeConfig scheme, std::size_t vocab_size,
              std::shared_ptr<const SynonymTable> synonyms = nullptr)
      : scheme_(scheme), vocab_size_(vocab_size) {
    scheme_.validate();
    if (scheme_.kind == SchemeKind::kKgw || scheme_.kind == SchemeKind::kUnigram) {
      partitions_.emplace(scheme_.key, scheme_.gamma, vocab_size_, scheme_.window());
    } else if (scheme_.kind == SchemeKind::kSirLite) {
      if (scheme_.num_synonym_classes > 0) {
        synonyms_ = std::make_shared<const SynonymTable>(SynonymTable::modulo(
            vocab_size_, static_cast<std::size_t>(scheme_.num_synonym_classes)));
      } else if (synonyms) {
        synonyms_ = std::move(synonyms);
      } else {
        synonyms_ =
            std::make_shared<const SynonymTable>(SynonymTable::frequency_buckets(vocab_size_));
      }
      require(synonyms_->vocab_size() == vocab_size_, ErrorCode::kInvalidParameter,
              "synonym table does not cover the vocabulary");
    } else {
      exp_keys_.emplace(scheme_.key, static_cast<std::size_t>(scheme_.exp_key_length),
                        vocab_size_);
    }
  }

  const SchemeConfig& scheme() const noexcept { return scheme_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  const SynonymTable* synonyms() const noexcept { return synonyms_.get(); }

  const GreenPartition& partition_for(std::span<const TokenId> history) {
    require(partitions_.has_value(), ErrorCode::kInvalidInput, "scheme has no green partition");
    return partitions_->for_history(history);
  }

  ExpKeySequence& exp_keys() {
    require(exp_keys_.has_value(), ErrorCode::kInvalidInput, "scheme has no EXP key sequence");
    return *exp_keys_;
  }

  // Whether the scheme's detector would count `next` as a hit after `history`.
  bool is_hit(std::span<const TokenId> history, TokenId next) {
    switch (scheme_.kind) {
      case SchemeKind::kKgw:
      case SchemeKind::kUnigram: return partition_for(history).is_green(next);
      case SchemeKind::kSirLite: {
        const auto window = context_window(history, scheme_.window());
        return sirlite_class_positive(scheme_.key, class_multiset_hash(window, *synonyms_),
                                      synonyms_->class_of(next));
      }
      case SchemeKind::kExp: break;
    }
    fail(ErrorCode::kInvalidInput, "EXP has no per-token hit rule");
  }

  // Reweights a next-token distribution in place: p_v e^{bias_v}, renormalized.
  // This equals softmax(bias_logits(log p)). `dist` must sum to 1.
  void reweight(std::span<const TokenId> history, std::span<double> dist,
                std::vector<TokenId>* favored = nullptr) {
    const double inv_total = 1.0 / reweight_unnormalized(history, dist, favored);
    for (double& x : dist) x *= inv_total;
  }

  // As reweight() without the final scaling; returns the normalizer. Only the
  // favored ids are touched, so the cost scales with the favored set.
  double reweight_unnormalized(std::span<const TokenId> history, std::span<double> dist,
                               std::vector<TokenId>* favored = nullptr) {
    const double up = std::exp(scheme_.delta);
    if (scheme_.kind == SchemeKind::kSirLite) {
      const auto window = context_window(history, scheme_.window());
      const std::uint64_t ms = class_multiset_hash(window, *synonyms_);
      // e^{+d} / e^{-d} weights equal e^{2d} / 1 up to normalization, so
      // negative classes are left untouched.
      const double ratio = up * up;
      double positive_mass = 0.0;
      std::uint64_t signs = 0;
      for (std::uint32_t c = 0; c < synonyms_->num_classes(); ++c) {
        if ((c & 63) == 0) signs = prf(scheme_.key.secret, ms, c >> 6);
        if (((signs >> (c & 63)) & 1u) == 0) continue;
        for (TokenId v : synonyms_->members(c)) {
          positive_mass += dist[v];
          dist[v] *= ratio;
          if (favored) favored->push_back(v);
        }
      }
      if (favored) std::sort(favored->begin(), favored->end());
      return 1.0 + (ratio - 1.0) * positive_mass;
    }
    const GreenPartition& part = partition_for(history);
    double green_mass = 0.0;
    part.for_each_green([&](TokenId v) {
      green_mass += dist[v];
      dist[v] *= up;
      if (favored) favored->push_back(v);
    });
    return 1.0 + (up - 1.0) * green_mass;
  }

  TokenSequence generate(const NGramModel& model, const TokenSequence& prompt, std::size_t length,
                         std::uint64_t rng_seed, Sampler sampler = Sampler::kMultinomial,
                         GenerationTrace* trace = nullptr) {
    require(model.vocab_size() == vocab_size_, ErrorCode::kInvalidParameter,
            "model vocabulary size does not match the watermark");
    TokenSequence out;
    out.source_model = model.model_id();
    out.ids.reserve(length);
    std::vector<TokenId> history = prompt.ids;
    history.reserve(prompt.size() + length);
    std::vector<double> dist(vocab_size_);
    Rng rng(rng_seed);
    const std::size_t start_row = scheme_.kind == SchemeKind::kExp ? exp_start_row(scheme_, rng_seed) : 0;
    if (scheme_.kind == SchemeKind::kExp) exp_keys_->materialize();
    // Windows may reach into the prompt; the detector only sees the
    // completion and leaves those first window() positions unscored.
    for (std::size_t i = 0; i < length; ++i) {
      model.fill_distribution(history, dist);
      TokenId next;
      if (scheme_.kind == SchemeKind::kExp) {
        const std::size_t row = start_row + i;
        next = exp_sample_neg_log(dist, exp_keys_->neg_log_row(row));
        if (trace) trace->key_rows.push_back(row % exp_keys_->length());
      } else {
        std::vector<TokenId>* favored = nullptr;
        if (trace) favored = &trace->favored.emplace_back();
        const double total = reweight_unnormalized(history, dist, favored);
        next = static_cast<TokenId>(sampler == Sampler::kGreedy ? argmax(dist)
                                                                : rng.categorical(dist, total));
      }
      out.ids.push_back(next);
      history.push_back(next);
    }
    return out;
  }

 private:
  SchemeConfig scheme_;
  std::size_t vocab_size_;
  std::shared_ptr<const SynonymTable> synonyms_;
  std::optional<PartitionCache> partitions_;
  std::optional<ExpKeySequence> exp_keys_;
};

inline TokenSequence watermarked_generate(const NGramModel& model, const TokenSequence& prompt,
                                          const SchemeConfig& scheme, std::size_t length,
                                          std::uint64_t rng_seed,
                                          std::shared_ptr<const SynonymTable> synonyms = nullptr) {
  Watermarker wm(scheme, model.vocab_size(), std::move(synonyms));
  return wm.generate(model, prompt, length, rng_seed);
}

}  // namespace wmlab
