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

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wmlab/synonyms.hpp"

namespace wmlab {
namespace {

TEST(SynonymTable, FrequencyBucketsKeepReservedIdsAlone) {
  const auto t = SynonymTable::frequency_buckets(12, 4);
  EXPECT_EQ(t.vocab_size(), 12u);
  EXPECT_EQ(t.class_of(kBosId), 0u);
  EXPECT_EQ(t.class_of(kUnkId), 1u);
  EXPECT_EQ(t.members(0).size(), 1u);
  EXPECT_EQ(t.members(1).size(), 1u);
  // ids 2..5, 6..9, 10..11
  EXPECT_EQ(t.num_classes(), 5u);
  EXPECT_EQ(t.class_of(2), t.class_of(5));
  EXPECT_NE(t.class_of(5), t.class_of(6));
  EXPECT_EQ(t.members(4).size(), 2u);
  EXPECT_DOUBLE_EQ(t.mean_class_size(), 12.0 / 5.0);
}

TEST(SynonymTable, ModuloClasses) {
  const auto t = SynonymTable::modulo(10, 3);
  EXPECT_EQ(t.num_classes(), 3u);
  for (TokenId id = 0; id < 10; ++id) EXPECT_EQ(t.class_of(id), id % 3);
  const auto m = t.members(1);
  EXPECT_EQ(std::vector<TokenId>(m.begin(), m.end()), (std::vector<TokenId>{1, 4, 7}));
}

TEST(SynonymTable, MembersPartitionTheVocabulary) {
  const auto t = SynonymTable::frequency_buckets(1000, 4);
  std::vector<int> seen(1000, 0);
  for (std::uint32_t c = 0; c < t.num_classes(); ++c) {
    for (TokenId id : t.members(c)) {
      EXPECT_EQ(t.class_of(id), c);
      ++seen[id];
    }
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(SynonymTable, RejectsBadInput) {
  EXPECT_WMLAB_ERROR(SynonymTable::modulo(10, 1), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(SynonymTable::modulo(3, 4), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(SynonymTable::frequency_buckets(10, 0), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(SynonymTable(std::vector<std::uint32_t>{0, 2}), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(SynonymTable::modulo(10, 2).class_of(10), ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace wmlab
