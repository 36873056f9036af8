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

#include <string>
#include <vector>

#include "test_util.hpp"
#include "wmlab/text.hpp"

namespace wmlab {
namespace {

using Words = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsOnWhitespace) {
  EXPECT_EQ(tokenize("Call me  Ishmael\n"), (Words{"call", "me", "ishmael"}));
  EXPECT_TRUE(tokenize("   \t\n").empty());
}

TEST(Tokenize, PunctuationBecomesSingleTokens) {
  EXPECT_EQ(tokenize("Whale, ho!"), (Words{"whale", ",", "ho", "!"}));
  EXPECT_EQ(tokenize("(a)"), (Words{"(", "a", ")"}));
}

TEST(Tokenize, KeepsInnerApostrophesAndNormalizesCurlyOnes) {
  EXPECT_EQ(tokenize("don't"), (Words{"don't"}));
  EXPECT_EQ(tokenize("don\xe2\x80\x99t"), (Words{"don't"}));
  EXPECT_EQ(tokenize("'tis"), (Words{"'", "tis"}));
  EXPECT_EQ(tokenize("sailors'"), (Words{"sailors", "'"}));
}

TEST(Tokenize, UnicodePunctuationAndSpaces) {
  EXPECT_EQ(tokenize("a\xe2\x80\x94" "b"), (Words{"a", "\xe2\x80\x94", "b"}));
  EXPECT_EQ(tokenize("a\xc2\xa0" "b"), (Words{"a", "b"}));
  EXPECT_EQ(tokenize("caf\xc3\xa9"), (Words{"caf\xc3\xa9"}));
}

TEST(Vocabulary, ReservedIdsAreFixed) {
  const Vocabulary v(Words{"x", "y"});
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.lookup(kBosId), kBosToken);
  EXPECT_EQ(v.lookup(kUnkId), kUnkToken);
  EXPECT_EQ(v.index_of("x"), 2u);
  EXPECT_EQ(v.index_of("y"), 3u);
  EXPECT_EQ(v.index_of("zzz"), kUnkId);
}

TEST(Vocabulary, LookupInvertsIndexOf) {
  const Vocabulary v(Words{"a", "b", "c", "d"});
  for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(v.index_of(v.lookup(id)), id);
}

TEST(Vocabulary, RejectsDuplicatesAndOutOfRange) {
  EXPECT_WMLAB_ERROR(Vocabulary(Words{"a", "a"}), ErrorCode::kInvalidInput);
  EXPECT_WMLAB_ERROR(Vocabulary(Words{"<s>"}), ErrorCode::kInvalidInput);
  const Vocabulary v(Words{"a"});
  EXPECT_WMLAB_ERROR(v.lookup(3), ErrorCode::kInvalidInput);
}

TEST(BuildVocabulary, RanksByFrequencyThenAlphabetically) {
  const Words words{"b", "a", "c", "b", "a", "b", "d"};
  const Vocabulary v = build_vocabulary(words, 100);
  EXPECT_EQ(v.tokens(), (Words{"<s>", "<unk>", "b", "a", "c", "d"}));
}

TEST(BuildVocabulary, CapCountsReservedIds) {
  const Words words{"b", "a", "c", "b", "a", "b", "d"};
  const Vocabulary v = build_vocabulary(words, 4);
  EXPECT_EQ(v.tokens(), (Words{"<s>", "<unk>", "b", "a"}));
  EXPECT_EQ(encode(v, words), (std::vector<TokenId>{2, 3, kUnkId, 2, 3, 2, kUnkId}));
  EXPECT_WMLAB_ERROR(build_vocabulary(words, 1), ErrorCode::kInvalidParameter);
}

TEST(Decode, JoinsTokensWithSpaces) {
  const Vocabulary v(Words{"call", "me"});
  EXPECT_EQ(decode(v, {2, 3}), "call me");
  EXPECT_EQ(decode(v, {}), "");
}

TEST(ReadTextFile, MissingFileIsReported) {
  EXPECT_WMLAB_ERROR(read_text_file("/nonexistent/wmlab.txt"), ErrorCode::kMissingFile);
}

}  // namespace
}  // namespace wmlab
