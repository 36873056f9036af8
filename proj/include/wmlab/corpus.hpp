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

// The shared experimental setting: one vocabulary, disjoint training shards,
// one model per shard, an evaluator model over the whole corpus, and a pool
// of prompts every model is queried with.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wmlab/common.hpp"
#include "wmlab/ngram.hpp"
#include "wmlab/random.hpp"
#include "wmlab/synonyms.hpp"
#include "wmlab/text.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

struct ModelSpec {
  std::string id;
  int order = 3;
  double smoothing = 0.1;
};

struct LabOptions {
  std::size_t vocab_cap = kDefaultVocabCap;
  std::size_t prompt_length = 16;
  std::size_t synonym_bucket = 4;
  int evaluator_order = 3;
  double evaluator_smoothing = 0.01;
};

// Each provider watermarks with its own key, derived from the shared secret.
inline WatermarkKey model_key(std::uint64_t secret, const std::string& model_id) {
  return WatermarkKey{derive_seed(secret, hash_string(model_id))};
}

// Contiguous, disjoint, near-equal shards.
inline std::vector<std::span<const TokenId>> split_shards(std::span<const TokenId> corpus,
                                                          std::size_t count) {
  require(count >= 1, ErrorCode::kInvalidParameter, "need at least one shard");
  require(corpus.size() >= count, ErrorCode::kCorpusTooSmall, "corpus smaller than shard count");
  std::vector<std::span<const TokenId>> shards;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t begin = corpus.size() * s / count;
    const std::size_t end = corpus.size() * (s + 1) / count;
    shards.push_back(corpus.subspan(begin, end - begin));
  }
  return shards;
}

// Disjoint windows of `length` tokens in corpus order.
inline std::vector<TokenSequence> prompt_pool(std::span<const TokenId> corpus,
                                              std::size_t length) {
  require(length >= 1, ErrorCode::kInvalidParameter, "prompt length must be >= 1");
  std::vector<TokenSequence> pool;
  for (std::size_t begin = 0; begin + length <= corpus.size(); begin += length) {
    TokenSequence p;
    p.ids.assign(corpus.begin() + static_cast<std::ptrdiff_t>(begin),
                 corpus.begin() + static_cast<std::ptrdiff_t>(begin + length));
    p.source_model = "corpus";
    pool.push_back(std::move(p));
  }
  return pool;
}

struct Lab {
  std::shared_ptr<const Vocabulary> vocab;
  std::vector<TokenId> corpus;
  std::vector<std::shared_ptr<const NGramModel>> models;
  std::shared_ptr<const NGramModel> evaluator;
  std::shared_ptr<const SynonymTable> synonyms;
  std::vector<TokenSequence> prompts;

  std::size_t model_index(const std::string& id) const {
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i]->model_id() == id) return i;
    }
    fail(ErrorCode::kInvalidParameter, "unknown model '" + id + "'");
  }
};

inline std::vector<std::string> read_corpus_words(const std::vector<std::string>& paths) {
  require(!paths.empty(), ErrorCode::kInvalidParameter, "no corpus files given");
  std::vector<std::string> words;
  for (const auto& p : paths) {
    auto w = tokenize(read_text_file(p));
    words.insert(words.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return words;
}

// Model i trains on shard i of the concatenated corpus files.
inline Lab build_lab(const std::vector<std::string>& corpus_paths,
                     const std::vector<ModelSpec>& specs, const LabOptions& opts = {}) {
  require(!specs.empty(), ErrorCode::kInvalidParameter, "no models configured");
  const auto words = read_corpus_words(corpus_paths);
  Lab lab;
  lab.vocab = std::make_shared<const Vocabulary>(build_vocabulary(words, opts.vocab_cap));
  lab.corpus = encode(*lab.vocab, words);
  const auto shards = split_shards(lab.corpus, specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    lab.models.push_back(std::make_shared<const NGramModel>(
        train_ngram(lab.vocab, shards[i], specs[i].order, specs[i].smoothing, specs[i].id)));
  }
  lab.evaluator = std::make_shared<const NGramModel>(train_ngram(
      lab.vocab, lab.corpus, opts.evaluator_order, opts.evaluator_smoothing, "evaluator"));
  lab.synonyms = std::make_shared<const SynonymTable>(
      SynonymTable::frequency_buckets(lab.vocab->size(), opts.synonym_bucket));
  lab.prompts = prompt_pool(lab.corpus, opts.prompt_length);
  return lab;
}

}  // namespace wmlab
