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
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wmlab/common.hpp"

namespace wmlab {

// Partition of the vocabulary into "synonym" classes. The same table drives
// the substitution attacks and the SIR-lite watermark, so a same-class edit is
// by construction invisible to SIR-lite.
class SynonymTable {
 public:
  SynonymTable() = default;

  explicit SynonymTable(std::vector<std::uint32_t> class_of) : class_of_(std::move(class_of)) {
    std::uint32_t num_classes = 0;
    for (auto c : class_of_) num_classes = std::max(num_classes, c + 1);
    members_.assign(num_classes, {});
    for (std::size_t id = 0; id < class_of_.size(); ++id) {
      members_[class_of_[id]].push_back(static_cast<TokenId>(id));
    }
    for (std::size_t c = 0; c < members_.size(); ++c) {
      require(!members_[c].empty(), ErrorCode::kInvalidParameter,
              "synonym class " + std::to_string(c) + " has no members");
    }
  }

  // Reserved ids <s> and <unk> are singletons; the remaining ids, which are
  // frequency-ranked, are grouped in consecutive buckets of `bucket_size`.
  static SynonymTable frequency_buckets(std::size_t vocab_size, std::size_t bucket_size = 4) {
    require(bucket_size >= 1, ErrorCode::kInvalidParameter, "bucket size must be >= 1");
    std::vector<std::uint32_t> class_of(vocab_size);
    for (std::size_t id = 0; id < vocab_size; ++id) {
      class_of[id] = id < 2 ? static_cast<std::uint32_t>(id)
                            : static_cast<std::uint32_t>(2 + (id - 2) / bucket_size);
    }
    return SynonymTable(std::move(class_of));
  }

  // class = id mod num_classes.
  static SynonymTable modulo(std::size_t vocab_size, std::size_t num_classes) {
    require(num_classes >= 2, ErrorCode::kInvalidParameter, "need at least 2 synonym classes");
    require(num_classes <= vocab_size, ErrorCode::kInvalidParameter,
            "more synonym classes than tokens");
    std::vector<std::uint32_t> class_of(vocab_size);
    for (std::size_t id = 0; id < vocab_size; ++id) {
      class_of[id] = static_cast<std::uint32_t>(id % num_classes);
    }
    return SynonymTable(std::move(class_of));
  }

  std::size_t vocab_size() const noexcept { return class_of_.size(); }
  std::size_t num_classes() const noexcept { return members_.size(); }

  std::uint32_t class_of(TokenId id) const {
    require(id < class_of_.size(), ErrorCode::kInvalidInput, "token id outside synonym table");
    return class_of_[id];
  }

  std::span<const TokenId> members(std::uint32_t cls) const { return members_.at(cls); }

  double mean_class_size() const {
    return members_.empty() ? 0.0
                            : static_cast<double>(class_of_.size()) /
                                  static_cast<double>(members_.size());
  }

  bool operator==(const SynonymTable& other) const { return class_of_ == other.class_of_; }

 private:
  std::vector<std::uint32_t> class_of_;
  std::vector<std::vector<TokenId>> members_;
};

}  // namespace wmlab
