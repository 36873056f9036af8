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

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wmlab/common.hpp"

namespace wmlab {

inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::size_t kDefaultVocabCap = 5000;

// Ids are dense in [0, size()). Id 0 is the begin-of-sequence marker and id 1
// the unknown-token fallback; the rest are ordered by descending corpus
// frequency, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  // `words` excludes the reserved entries, which are always prepended.
  explicit Vocabulary(std::vector<std::string> words) {
    tokens_.reserve(words.size() + 2);
    tokens_.emplace_back(kBosToken);
    tokens_.emplace_back(kUnkToken);
    for (auto& w : words) tokens_.push_back(std::move(w));
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
      require(inserted, ErrorCode::kInvalidInput,
              "duplicate vocabulary entry '" + tokens_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return tokens_.size(); }

  const std::string& lookup(TokenId id) const {
    require(id < tokens_.size(), ErrorCode::kInvalidInput,
            "token id " + std::to_string(id) + " out of range");
    return tokens_[id];
  }

  TokenId index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkId : it->second;
  }

  bool contains(std::string_view token) const {
    return index_.count(std::string(token)) != 0;
  }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TokenSequence {
  std::vector<TokenId> ids;
  std::string source_model = "external";

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

namespace detail {

// Length of the UTF-8 sequence starting with lead byte `c`.
inline std::size_t utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xe) return 3;
  if ((c >> 3) == 0x1e) return 4;
  return 1;
}

inline char32_t utf8_decode(std::string_view s) {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  switch (s.size()) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1f) << 6) | (b(1) & 0x3f);
    case 3: return ((b(0) & 0x0f) << 12) | ((b(1) & 0x3f) << 6) | (b(2) & 0x3f);
    case 4:
      return ((b(0) & 0x07) << 18) | ((b(1) & 0x3f) << 12) | ((b(2) & 0x3f) << 6) |
             (b(3) & 0x3f);
  }
  return 0xfffd;
}

}  // namespace detail

// Lowercased word-level tokenization. Whitespace separates tokens; ASCII
// punctuation and the U+2000..U+206F punctuation block (em-dashes, curly
// quotes) become single-character tokens. Apostrophes inside a word, straight
// or curly, stay in the word and are normalized to '\''.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  const auto flush = [&] {
    // Trailing/leading apostrophes are quotes, not contractions.
    std::size_t b = 0, e = word.size();
    while (b < e && word[b] == '\'') ++b;
    while (e > b && word[e - 1] == '\'') --e;
    for (std::size_t i = 0; i < b; ++i) out.emplace_back("'");
    if (e > b) out.push_back(word.substr(b, e - b));
    for (std::size_t i = e; i < word.size(); ++i) out.emplace_back("'");
    word.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    const std::size_t len = std::min(detail::utf8_length(lead), text.size() - i);
    const std::string_view unit = text.substr(i, len);
    i += len;
    if (len == 1) {
      const char c = static_cast<char>(lead);
      if (c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        flush();
      } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
        word.push_back(c);
      } else if (c >= 'A' && c <= 'Z') {
        word.push_back(static_cast<char>(c - 'A' + 'a'));
      } else if (c == '\'') {
        word.push_back('\'');
      } else {
        flush();
        out.emplace_back(1, c);
      }
      continue;
    }
    const char32_t cp = detail::utf8_decode(unit);
    if (cp == 0x2019 || cp == 0x2018) {
      word.push_back('\'');
    } else if (cp == 0x00a0 || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200b)) {
      flush();
    } else if (cp >= 0x2000 && cp <= 0x206f) {
      flush();
      out.emplace_back(unit);
    } else {
      word.append(unit);
    }
  }
  flush();
  return out;
}

// Frequency-ranked vocabulary capped at `cap` entries including the two
// reserved ids.
inline Vocabulary build_vocabulary(const std::vector<std::string>& words,
                                   std::size_t cap = kDefaultVocabCap) {
  require(cap >= 2, ErrorCode::kInvalidParameter, "vocabulary cap must be >= 2");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& w : words) {
    if (w == kBosToken || w == kUnkToken) continue;
    ++freq[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > cap - 2) ranked.resize(cap - 2);
  std::vector<std::string> kept;
  kept.reserve(ranked.size());
  for (auto& [w, n] : ranked) kept.push_back(std::move(w));
  return Vocabulary(std::move(kept));
}

inline std::vector<TokenId> encode(const Vocabulary& vocab,
                                   const std::vector<std::string>& words) {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab.index_of(w));
  return ids;
}

inline std::string decode(const Vocabulary& vocab, const std::vector<TokenId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.lookup(ids[i]);
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kMissingFile, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wmlab
