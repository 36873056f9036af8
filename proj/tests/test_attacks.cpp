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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "test_util.hpp"
#include "wmlab/attacks.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/stats.hpp"

namespace wmlab {
namespace {

constexpr WatermarkKey kKey{0xa77ac4ULL};

TokenSequence random_text(std::size_t len, std::size_t v, std::uint64_t seed) {
  TokenSequence t;
  Rng rng(seed);
  for (std::size_t i = 0; i < len; ++i) t.ids.push_back(static_cast<TokenId>(2 + rng.below(v - 2)));
  return t;
}

SynonymTable singletons(std::size_t v) {
  std::vector<std::uint32_t> cls(v);
  for (std::size_t i = 0; i < v; ++i) cls[i] = static_cast<std::uint32_t>(i);
  return SynonymTable(std::move(cls));
}

TEST(SubstitutionAttack, ZeroRateAndSingletonsAreIdentity) {
  const auto text = random_text(300, 100, 1);
  const auto table = SynonymTable::frequency_buckets(100, 4);
  EXPECT_EQ(substitution_attack(text, table, 0.0, 5), text);
  EXPECT_EQ(substitution_attack(text, singletons(100), 1.0, 5), text);
}

TEST(SubstitutionAttack, ChangedFractionMatchesExpectation) {
  const std::size_t v = 402;
  const auto table = SynonymTable::frequency_buckets(v, 4);  // 100 full classes of 4
  const auto text = random_text(1000, v, 2);
  const auto out = substitution_attack(text, table, 0.3, 7);
  ASSERT_EQ(out.size(), text.size());
  std::size_t changed = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    EXPECT_EQ(table.class_of(out.ids[i]), table.class_of(text.ids[i]));
    changed += out.ids[i] != text.ids[i] ? 1 : 0;
  }
  const double expected = 0.3 * (1.0 - 1.0 / 4.0);
  EXPECT_NEAR(changed / 1000.0, expected, 0.05);
}

TEST(ParaphraseAttack, ZeroRateIsIdentity) {
  const auto text = random_text(100, 60, 3);
  EXPECT_EQ(paraphrase_attack(text, 8, 0.0, SynonymTable::frequency_buckets(60, 4), 1), text);
}

TEST(ParaphraseAttack, WholeWindowShuffleIsPermutation) {
  const auto text = random_text(50, 60, 4);
  const auto out = paraphrase_attack(text, 64, 1.0, singletons(60), 2);
  EXPECT_NE(out, text);
  auto a = text.ids, b = out.ids;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(ParaphraseAttack, ShufflesStayInsideWindows) {
  const auto text = random_text(64, 60, 5);
  const auto out = paraphrase_attack(text, 8, 1.0, singletons(60), 3);
  ASSERT_EQ(out.size(), text.size());
  for (std::size_t w = 0; w < 64; w += 8) {
    std::vector<TokenId> a(text.ids.begin() + w, text.ids.begin() + w + 8);
    std::vector<TokenId> b(out.ids.begin() + w, out.ids.begin() + w + 8);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b) << "window " << w;
  }
  EXPECT_WMLAB_ERROR(paraphrase_attack(text, 1, 0.5, singletons(60), 3), ErrorCode::kInvalidParameter);
}

TEST(AttackSuccessRate, CountsFlipsAmongFlagged) {
  const auto results = [](std::initializer_list<std::pair<int, bool>> runs) {
    std::vector<DetectionResult> out;
    for (auto [count, flagged] : runs) {
      for (int i = 0; i < count; ++i) out.push_back(DetectionResult{0, 1, 0, flagged, 1, "KGW"});
    }
    return out;
  };
  const auto pre = results({{80, true}, {20, false}});
  EXPECT_DOUBLE_EQ(attack_success_rate(pre, pre), 0.0);
  EXPECT_DOUBLE_EQ(attack_success_rate(pre, results({{100, false}})), 1.0);
  EXPECT_DOUBLE_EQ(attack_success_rate(pre, results({{40, false}, {40, true}, {20, false}})), 0.5);
  EXPECT_WMLAB_ERROR(attack_success_rate(pre, results({{99, false}})), ErrorCode::kInvalidInput);
}

TEST(AttackConfig, ValidatesAndParses) {
  EXPECT_NO_THROW(AttackConfig::substitution().validate());
  EXPECT_WMLAB_ERROR(AttackConfig::substitution(1.5).validate(), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(AttackConfig::paraphrase(1).validate(), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(AttackConfig::removal(0.5).validate(), ErrorCode::kInvalidParameter);
  EXPECT_EQ(parse_attack_kind("dipper"), AttackKind::kParaphrase);
  EXPECT_EQ(parse_attack_kind("removal"), AttackKind::kRemoval);
  EXPECT_WMLAB_ERROR(parse_attack_kind("nope"), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(apply_attack(random_text(5, 10, 1), AttackConfig::removal(), singletons(10), nullptr),
                     ErrorCode::kInvalidParameter);
}

// Attacks against KGW text from a reference-style model, judged by the evaluator.
class AttacksOnCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lab_ = new Lab(build_lab({testing::corpus_path()}, {{"m0", 2, 0.01}}));
    const auto& model = *lab_->models[0];
    Watermarker wm(SchemeConfig::kgw(kKey), model.vocab_size());
    texts_ = new std::vector<TokenSequence>();
    for (std::size_t i = 0; i < 100; ++i) {
      texts_->push_back(wm.generate(model, lab_->prompts[i], 200, derive_seed(20, i)));
    }
  }
  static void TearDownTestSuite() {
    delete texts_;
    delete lab_;
  }
  static const NGramModel& evaluator() { return *lab_->evaluator; }
  static const SynonymTable& table() { return *lab_->synonyms; }
  static inline Lab* lab_ = nullptr;
  static inline std::vector<TokenSequence>* texts_ = nullptr;
};

TEST_F(AttacksOnCorpus, ParaphraseLowersMeanZ) {
  Detector det(SchemeConfig::kgw(kKey), lab_->vocab->size());
  double pre = 0.0, post = 0.0;
  for (std::size_t i = 0; i < texts_->size(); ++i) {
    pre += det.score((*texts_)[i].ids);
    post += det.score(paraphrase_attack((*texts_)[i], 8, 0.5, table(), derive_seed(21, i)).ids);
  }
  EXPECT_LT(post, pre);
}

TEST_F(AttacksOnCorpus, RemovalAtUnitBudgetNearIdentityOnReferenceOptimum) {
  std::size_t changed = 0, total = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& prompt = lab_->prompts[i];
    const auto text = generate(evaluator(), prompt, 200, Sampler::kGreedy, 0);
    const auto out = removal_attack(text, evaluator(), table(), 1.0, derive_seed(22, i), prompt.ids);
    for (std::size_t j = 0; j < text.size(); ++j) changed += out.ids[j] != text.ids[j] ? 1 : 0;
    total += text.size();
  }
  EXPECT_LE(static_cast<double>(changed) / total, 0.02);
}

TEST_F(AttacksOnCorpus, RemovalWithUnboundedBudgetBreaksEveryEditableTransition) {
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& text = (*texts_)[i];
    const auto out = removal_attack(text, evaluator(), table(), inf, derive_seed(23, i));
    ASSERT_EQ(out.size(), text.size());
    for (std::size_t j = 0; j < text.size(); ++j) {
      ASSERT_EQ(table().class_of(out.ids[j]), table().class_of(text.ids[j]));
    }
    for (std::size_t j = 1; j < text.size(); ++j) {
      const bool editable = table().members(table().class_of(text.ids[j])).size() > 1 ||
                            table().members(table().class_of(text.ids[j - 1])).size() > 1;
      if (!editable) continue;
      EXPECT_FALSE(out.ids[j - 1] == text.ids[j - 1] && out.ids[j] == text.ids[j])
          << "text " << i << " transition " << j;
    }
  }
}

TEST_F(AttacksOnCorpus, RemovalRespectsPerplexityBudget) {
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& text = (*texts_)[i];
    const auto& prompt = lab_->prompts[i];
    const auto out = removal_attack(text, evaluator(), table(), 1.3, derive_seed(24, i), prompt.ids);
    EXPECT_LE(perplexity(evaluator(), out.ids, prompt.ids),
              1.3 * perplexity(evaluator(), text.ids, prompt.ids) * (1 + 1e-9));
  }
}

TEST_F(AttacksOnCorpus, DefaultAttacksTradeUtilityForEvasion) {
  Detector det(SchemeConfig::kgw(kKey), lab_->vocab->size());
  for (const auto& cfg : {AttackConfig::substitution(), AttackConfig::paraphrase(),
                          AttackConfig::removal()}) {
    std::vector<double> ppl_pre, ppl_post, z_pre, z_post;
    for (std::size_t i = 0; i < texts_->size(); ++i) {
      const auto& text = (*texts_)[i];
      const auto& prompt = lab_->prompts[i];
      auto attack = cfg;
      attack.rng_seed = derive_seed(25, i);
      const auto out = apply_attack(text, attack, table(), &evaluator(), prompt.ids);
      ASSERT_EQ(out.size(), text.size());
      ppl_pre.push_back(perplexity(evaluator(), text.ids, prompt.ids));
      ppl_post.push_back(perplexity(evaluator(), out.ids, prompt.ids));
      z_pre.push_back(det.score(text.ids));
      z_post.push_back(det.score(out.ids));
    }
    const auto name = attack_kind_name(cfg.kind);
    EXPECT_GE(mean_of(ppl_post), mean_of(ppl_pre)) << name;
    EXPECT_LE(mean_of(z_post), mean_of(z_pre)) << name;
    EXPECT_LT(paired_t_test_greater(ppl_post, ppl_pre).p_value, 0.05) << name;
    EXPECT_LT(paired_t_test_greater(z_pre, z_post).p_value, 0.05) << name;
  }
}

TEST_F(AttacksOnCorpus, TprNonIncreasingInSubstitutionRate) {
  Detector det(SchemeConfig::kgw(kKey), lab_->vocab->size());
  double previous = 2.0;
  for (double rate : {0.0, 0.1, 0.3, 0.5}) {
    int flagged = 0;
    for (std::size_t i = 0; i < texts_->size(); ++i) {
      const auto out = substitution_attack((*texts_)[i], table(), rate, derive_seed(26, i));
      flagged += det.detect(out.ids).is_watermarked ? 1 : 0;
    }
    const double tpr = flagged / static_cast<double>(texts_->size());
    EXPECT_LE(tpr, previous) << "rate " << rate;
    previous = tpr;
  }
}

}  // namespace
}  // namespace wmlab
