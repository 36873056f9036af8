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

// Add-k smoothed n-gram language model with back-off.
//
// For a history h the model looks for the longest suffix context c of h, at
// most order-1 tokens and padded on the left with <s>, that occurred in
// training. The next-token distribution is then
//
//     P(v | c) = (count(c, v) + k) / (count(c) + k |V|)
//
// The unigram level always exists, so every distribution is proper and every
// probability is strictly positive.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/random.hpp"
#include "wmlab/text.hpp"

namespace wmlab {

inline constexpr std::string_view kModelMagic = "WMLAB-NGRAM-1";
inline constexpr int kMaxOrder = 5;
inline constexpr std::size_t kMaxVocab = 1u << 16;

struct ContextStats {
  std::uint64_t total = 0;
  // Sorted by token id.
  std::vector<std::pair<TokenId, std::uint32_t>> successors;

  std::uint32_t count_of(TokenId id) const {
    auto it = std::lower_bound(
        successors.begin(), successors.end(), id,
        [](const auto& entry, TokenId v) { return entry.first < v; });
    return (it != successors.end() && it->first == id) ? it->second : 0;
  }

  bool operator==(const ContextStats&) const = default;
};

enum class Sampler { kGreedy, kMultinomial };

class NGramModel {
 public:
  using Level = std::unordered_map<std::uint64_t, ContextStats>;

  NGramModel(std::shared_ptr<const Vocabulary> vocab, int order, double smoothing_k,
             std::string model_id)
      : vocab_(std::move(vocab)),
        order_(order),
        k_(smoothing_k),
        model_id_(std::move(model_id)),
        levels_(static_cast<std::size_t>(order)) {}

  int order() const noexcept { return order_; }
  double smoothing_k() const noexcept { return k_; }
  const std::string& model_id() const noexcept { return model_id_; }
  const Vocabulary& vocab() const noexcept { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& shared_vocab() const noexcept { return vocab_; }
  std::size_t vocab_size() const noexcept { return vocab_->size(); }
  const std::vector<Level>& levels() const noexcept { return levels_; }

  // Packs the `length` most recent ids of `history` (BOS-padded) into a key.
  static std::uint64_t context_key(std::span<const TokenId> history, int length) {
    std::uint64_t key = 0;
    for (int j = 0; j < length; ++j) {
      const std::size_t back = static_cast<std::size_t>(j) + 1;
      const TokenId id = back <= history.size() ? history[history.size() - back] : kBosId;
      key |= static_cast<std::uint64_t>(id) << (16 * j);
    }
    return key;
  }

  // Longest seen context for `history`.
  const ContextStats& context_for(std::span<const TokenId> history) const {
    for (int length = order_ - 1; length > 0; --length) {
      const auto& level = levels_[static_cast<std::size_t>(length)];
      auto it = level.find(context_key(history, length));
      if (it != level.end() && it->second.total > 0) return it->second;
    }
    return levels_[0].at(0);
  }

  void fill_distribution(std::span<const TokenId> history, std::span<double> out) const {
    require(out.size() == vocab_size(), ErrorCode::kInvalidInput,
            "distribution buffer has wrong length");
    const ContextStats& ctx = context_for(history);
    const double denom = static_cast<double>(ctx.total) + k_ * static_cast<double>(vocab_size());
    const double base = k_ / denom;
    std::fill(out.begin(), out.end(), base);
    for (const auto& [id, count] : ctx.successors) {
      out[id] = (static_cast<double>(count) + k_) / denom;
    }
  }

  double probability(std::span<const TokenId> history, TokenId next) const {
    const ContextStats& ctx = context_for(history);
    const double denom = static_cast<double>(ctx.total) + k_ * static_cast<double>(vocab_size());
    return (static_cast<double>(ctx.count_of(next)) + k_) / denom;
  }

  // Number of tokens strictly more probable than `next` in this context.
  std::size_t rank_of(std::span<const TokenId> history, TokenId next) const {
    const ContextStats& ctx = context_for(history);
    const std::uint32_t c = ctx.count_of(next);
    std::size_t rank = 0;
    for (const auto& entry : ctx.successors) rank += entry.second > c ? 1 : 0;
    return rank;
  }

  bool operator==(const NGramModel& other) const {
    return order_ == other.order_ && k_ == other.k_ && model_id_ == other.model_id_ &&
           *vocab_ == *other.vocab_ && levels_ == other.levels_;
  }

 private:
  template <typename Docs>
  friend NGramModel train_ngram_documents(std::shared_ptr<const Vocabulary>, const Docs&, int,
                                          double, std::string);
  friend NGramModel load_model(std::istream&);

  std::shared_ptr<const Vocabulary> vocab_;
  int order_;
  double k_;
  std::string model_id_;
  std::vector<Level> levels_;  // levels_[L] holds contexts of length L
};

namespace detail {

inline void validate_training_args(std::size_t corpus_tokens, int order, double k,
                                   std::size_t vocab_size) {
  require(order >= 1 && order <= kMaxOrder, ErrorCode::kInvalidParameter,
          "order must be in [1, " + std::to_string(kMaxOrder) + "], got " + std::to_string(order));
  require(k > 0.0 && std::isfinite(k), ErrorCode::kInvalidParameter,
          "smoothing_k must be positive");
  require(vocab_size <= kMaxVocab, ErrorCode::kInvalidParameter, "vocabulary too large");
  require(corpus_tokens > 0 && corpus_tokens >= static_cast<std::size_t>(order),
          ErrorCode::kCorpusTooSmall,
          "corpus has " + std::to_string(corpus_tokens) + " tokens, order is " +
              std::to_string(order));
}

}  // namespace detail

// Trains on a collection of documents; each document's history starts at <s>.
template <typename Docs>
NGramModel train_ngram_documents(std::shared_ptr<const Vocabulary> vocab, const Docs& documents,
                                 int order, double smoothing_k, std::string model_id) {
  std::size_t total_tokens = 0;
  for (const auto& doc : documents) total_tokens += std::size(doc);
  require(vocab != nullptr, ErrorCode::kInvalidParameter, "null vocabulary");
  detail::validate_training_args(total_tokens, order, smoothing_k, vocab->size());

  NGramModel model(std::move(vocab), order, smoothing_k, std::move(model_id));
  using Counts = std::unordered_map<std::uint64_t, std::unordered_map<TokenId, std::uint32_t>>;
  std::vector<Counts> raw(static_cast<std::size_t>(order));
  for (const auto& doc : documents) {
    const std::span<const TokenId> ids(std::data(doc), std::size(doc));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const TokenId next = ids[i];
      require(next < model.vocab_size(), ErrorCode::kInvalidInput,
              "corpus token id out of vocabulary range");
      const auto history = ids.first(i);
      for (int length = 0; length < order; ++length) {
        ++raw[static_cast<std::size_t>(length)][NGramModel::context_key(history, length)][next];
      }
    }
  }
  for (std::size_t length = 0; length < raw.size(); ++length) {
    auto& level = model.levels_[length];
    level.reserve(raw[length].size());
    for (auto& [key, nexts] : raw[length]) {
      ContextStats stats;
      stats.successors.assign(nexts.begin(), nexts.end());
      std::sort(stats.successors.begin(), stats.successors.end());
      for (const auto& entry : stats.successors) stats.total += entry.second;
      level.emplace(key, std::move(stats));
    }
  }
  return model;
}

inline NGramModel train_ngram(std::shared_ptr<const Vocabulary> vocab,
                              std::span<const TokenId> corpus, int order, double smoothing_k,
                              std::string model_id) {
  const std::vector<std::span<const TokenId>> docs{corpus};
  return train_ngram_documents(std::move(vocab), docs, order, smoothing_k, std::move(model_id));
}

inline std::vector<double> next_token_distribution(const NGramModel& model,
                                                   std::span<const TokenId> context) {
  std::vector<double> out(model.vocab_size());
  model.fill_distribution(context, out);
  return out;
}

// exp(-(1/K) sum_i log P(y_i | prefix, y_<i)).
inline double perplexity(const NGramModel& model, std::span<const TokenId> text,
                         std::span<const TokenId> prefix = {}) {
  require(!text.empty(), ErrorCode::kInvalidInput, "perplexity of empty text");
  std::vector<TokenId> history(prefix.begin(), prefix.end());
  history.reserve(prefix.size() + text.size());
  double nll = 0.0;
  for (TokenId y : text) {
    nll -= std::log(model.probability(history, y));
    history.push_back(y);
  }
  return std::exp(nll / static_cast<double>(text.size()));
}

inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline TokenSequence generate(const NGramModel& model, const TokenSequence& prompt,
                              std::size_t length, Sampler sampler, std::uint64_t rng_seed) {
  TokenSequence out;
  out.source_model = model.model_id();
  out.ids.reserve(length);
  std::vector<TokenId> history = prompt.ids;
  std::vector<double> dist(model.vocab_size());
  Rng rng(rng_seed);
  for (std::size_t i = 0; i < length; ++i) {
    model.fill_distribution(history, dist);
    const auto next = static_cast<TokenId>(
        sampler == Sampler::kGreedy ? argmax(dist) : rng.categorical(dist, 1.0));
    out.ids.push_back(next);
    history.push_back(next);
  }
  return out;
}

// Text dump: magic line, header line, one vocabulary token per line, then one
// line per context: "<level> <ctx ids oldest..newest> : <id>:<count> ...".
inline void save_model(const NGramModel& model, std::ostream& out) {
  char kbuf[64];
  std::snprintf(kbuf, sizeof kbuf, "%.17g", model.smoothing_k());
  out << kModelMagic << '\n';
  out << "order " << model.order() << " vocab " << model.vocab_size() << " k " << kbuf
      << " model_id " << model.model_id() << '\n';
  for (const auto& tok : model.vocab().tokens()) out << tok << '\n';
  for (std::size_t length = 0; length < model.levels().size(); ++length) {
    const auto& level = model.levels()[length];
    std::vector<std::uint64_t> keys;
    keys.reserve(level.size());
    for (const auto& entry : level) keys.push_back(entry.first);
    std::sort(keys.begin(), keys.end());
    out << "level " << length << ' ' << keys.size() << '\n';
    for (std::uint64_t key : keys) {
      out << length;
      for (std::size_t j = length; j > 0; --j) out << ' ' << ((key >> (16 * (j - 1))) & 0xffff);
      out << " :";
      for (const auto& [id, count] : level.at(key).successors) out << ' ' << id << ':' << count;
      out << '\n';
    }
  }
}

inline NGramModel load_model(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && line == kModelMagic, ErrorCode::kParse,
          "missing model magic '" + std::string(kModelMagic) + "'");
  std::string w_order, w_vocab, w_k, w_id, model_id;
  int order = 0;
  std::size_t vocab_size = 0;
  double k = 0.0;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, "missing model header");
  {
    std::istringstream hs(line);
    hs >> w_order >> order >> w_vocab >> vocab_size >> w_k >> k >> w_id >> model_id;
    require(hs && w_order == "order" && w_vocab == "vocab" && w_k == "k" && w_id == "model_id",
            ErrorCode::kParse, "malformed model header: " + line);
  }
  require(vocab_size >= 2 && vocab_size <= kMaxVocab, ErrorCode::kParse, "bad vocabulary size");
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, "truncated vocabulary");
    if (i >= 2) words.push_back(line);
  }
  detail::validate_training_args(std::max<std::size_t>(1, static_cast<std::size_t>(order)), order,
                                 k, vocab_size);
  NGramModel model(std::make_shared<const Vocabulary>(std::move(words)), order, k, model_id);
  for (int length = 0; length < order; ++length) {
    std::string word;
    int lvl = -1;
    std::size_t n = 0;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, "missing level header");
    std::istringstream ls(line);
    ls >> word >> lvl >> n;
    require(ls && word == "level" && lvl == length, ErrorCode::kParse,
            "malformed level header: " + line);
    auto& level = model.levels_[static_cast<std::size_t>(length)];
    for (std::size_t c = 0; c < n; ++c) {
      require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, "truncated counts");
      std::istringstream cs(line);
      int l = -1;
      cs >> l;
      require(l == length, ErrorCode::kParse, "context line at wrong level");
      std::uint64_t key = 0;
      for (int j = length; j > 0; --j) {
        std::uint64_t id = 0;
        cs >> id;
        key |= id << (16 * (j - 1));
      }
      cs >> word;
      require(cs && word == ":", ErrorCode::kParse, "malformed context line: " + line);
      ContextStats stats;
      std::string pair;
      while (cs >> pair) {
        const auto colon = pair.find(':');
        require(colon != std::string::npos, ErrorCode::kParse, "malformed count '" + pair + "'");
        const auto id = static_cast<TokenId>(std::stoul(pair.substr(0, colon)));
        const auto cnt = static_cast<std::uint32_t>(std::stoul(pair.substr(colon + 1)));
        require(id < vocab_size, ErrorCode::kParse, "count token id out of range");
        stats.successors.emplace_back(id, cnt);
        stats.total += cnt;
      }
      level.emplace(key, std::move(stats));
    }
  }
  require(model.levels_[0].count(0) == 1, ErrorCode::kParse, "model has no unigram counts");
  return model;
}

inline void save_model_file(const NGramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path + "'");
  save_model(model, out);
}

inline NGramModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kMissingFile, "cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace wmlab
