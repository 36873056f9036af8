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
#include <set>
#include <vector>

#include "test_util.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/scenario.hpp"

namespace wmlab {
namespace {

BankOptions small_bank() {
  BankOptions o;
  o.train_per_class = 100;
  o.test_per_class = 50;
  o.completion_length = 100;
  o.secret = 20260101;
  o.train.epochs = 200;
  return o;
}

std::vector<NamedScheme> kgw_only() { return {{"kgw", SchemeConfig::kgw(WatermarkKey{})}}; }

TEST(ScenarioSpec, EnforcesSubsetRules) {
  const std::vector<std::string> ms{"m0", "m1", "m2"};
  EXPECT_NO_THROW(ScenarioSpec::a(ms).validate());
  EXPECT_NO_THROW(ScenarioSpec::b(ms, "m1", "kgw").validate());
  EXPECT_NO_THROW(ScenarioSpec::c(ms, "kgw").validate());
  auto bad_a = ScenarioSpec::a(ms);
  bad_a.watermarked_models = {"m0"};
  EXPECT_WMLAB_ERROR(bad_a.validate(), ErrorCode::kInvalidParameter);
  auto bad_b = ScenarioSpec::b(ms, "m1", "kgw");
  bad_b.watermarked_models.push_back("m2");
  EXPECT_WMLAB_ERROR(bad_b.validate(), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(ScenarioSpec::b(ms, "m9", "kgw").validate(), ErrorCode::kInvalidParameter);
  auto bad_c = ScenarioSpec::c(ms, "kgw");
  bad_c.watermarked_models.pop_back();
  EXPECT_WMLAB_ERROR(bad_c.validate(), ErrorCode::kInvalidParameter);
  auto no_scheme = ScenarioSpec::c(ms, "kgw");
  no_scheme.scheme.reset();
  EXPECT_WMLAB_ERROR(no_scheme.validate(), ErrorCode::kInvalidParameter);
  EXPECT_WMLAB_ERROR(ScenarioSpec::a({"m0"}).validate(), ErrorCode::kInvalidParameter);
  EXPECT_EQ(parse_scenario("b"), Scenario::kB);
  EXPECT_WMLAB_ERROR(parse_scenario("D"), ErrorCode::kInvalidParameter);
}

class ScenarioOnCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lab_ = new Lab(build_lab({testing::corpus_path()},
                             {{"m0", 2, 0.01}, {"m1", 3, 0.05}, {"m2", 3, 0.1}, {"m3", 4, 0.5}}));
  }
  static void TearDownTestSuite() { delete lab_; }
  static std::vector<std::string> ids() { return {"m0", "m1", "m2", "m3"}; }
  static inline Lab* lab_ = nullptr;
};

TEST_F(ScenarioOnCorpus, BankIsPairedAndStratified) {
  TextBank bank(*lab_, kgw_only(), small_bank(), 7);
  const auto train = bank.train_indices();
  const auto test = bank.test_indices();
  EXPECT_EQ(train.size(), 100u);
  EXPECT_EQ(test.size(), 50u);
  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  EXPECT_EQ(all.size(), 150u);
  EXPECT_EQ(bank.train_indices(30), std::vector<std::size_t>(train.begin(), train.begin() + 30));
  EXPECT_WMLAB_ERROR(bank.train_indices(101), ErrorCode::kInvalidParameter);
  // The watermark changes what is sampled, never the prompt it answers.
  const auto& plain = bank.texts(0, kNoScheme);
  const auto& marked = bank.texts(0, 0);
  ASSERT_EQ(plain.size(), 150u);
  EXPECT_NE(plain[0], marked[0]);
  TextBank again(*lab_, kgw_only(), small_bank(), 7);
  EXPECT_EQ(again.texts(0, kNoScheme), plain);
  EXPECT_EQ(again.prompts(), bank.prompts());
  EXPECT_EQ(bank.perplexities(0, kNoScheme).size(), 150u);
  // Each model keys its watermark separately.
  EXPECT_NE(bank.keyed_scheme(0, 0).key, bank.keyed_scheme(0, 1).key);
  EXPECT_EQ(bank.keyed_scheme(0, 0).key, model_key(20260101, "m0"));
}

TEST_F(ScenarioOnCorpus, IdenticalModelsAreAtChance) {
  Lab twins = *lab_;
  const auto shard = split_shards(lab_->corpus, 4)[0];
  twins.models = {std::make_shared<const NGramModel>(train_ngram(lab_->vocab, shard, 2, 0.01, "x")),
                  std::make_shared<const NGramModel>(train_ngram(lab_->vocab, shard, 2, 0.01, "y"))};
  auto opts = small_bank();
  opts.scheme_features = false;
  TextBank bank(twins, {}, opts, 3);
  const auto r = run_scenario(ScenarioSpec::a({"x", "y"}), bank);
  EXPECT_NEAR(r.metrics.macro_f1, 0.5, 0.1);
}

// Stated for default dataset sizes and training settings.
TEST_F(ScenarioOnCorpus, WatermarkingOneModelKeepsItsOwnF1) {
  BankOptions defaults;
  defaults.secret = 20260101;
  TextBank bank(*lab_, kgw_only(), defaults, 11);
  const auto a = run_scenario(ScenarioSpec::a(ids()), bank);
  EXPECT_EQ(a.train_per_class, 500u);
  EXPECT_EQ(a.metrics.confusion.size(), 4u);
  for (const auto& m : ids()) {
    const auto b = run_scenario(ScenarioSpec::b(ids(), m, "kgw"), bank);
    EXPECT_GE(b.metrics.for_label(m).f1, a.metrics.for_label(m).f1) << m;
  }
}

TEST_F(ScenarioOnCorpus, RunScenarioIsDeterministic) {
  TextBank b1(*lab_, kgw_only(), small_bank(), 5), b2(*lab_, kgw_only(), small_bank(), 5);
  const auto r1 = run_scenario(ScenarioSpec::c(ids(), "kgw"), b1, 50);
  const auto r2 = run_scenario(ScenarioSpec::c(ids(), "kgw"), b2, 50);
  EXPECT_EQ(r1.metrics.confusion, r2.metrics.confusion);
  EXPECT_EQ(r1.metrics.macro_f1, r2.metrics.macro_f1);
  EXPECT_EQ(r1.train_per_class, 50u);
  EXPECT_WMLAB_ERROR(run_scenario(ScenarioSpec::c(ids(), "nope"), b1), ErrorCode::kInvalidParameter);
}

}  // namespace
}  // namespace wmlab
