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
#include <vector>

#include "test_util.hpp"
#include "wmlab/classifier.hpp"
#include "wmlab/corpus.hpp"

namespace wmlab {
namespace {

constexpr WatermarkKey kKey{0xc1a55ULL};

// Gaussian blobs: class c is centred at `sep * c` on the first axis.
std::vector<LabeledExample> blobs(std::size_t classes, std::size_t per_class, double sep,
                                  std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledExample> out;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      LabeledExample ex;
      ex.label = "c" + std::to_string(c);
      for (std::size_t j = 0; j < dim; ++j) {
        const double noise = rng.uniform() - 0.5;
        ex.features.push_back(j == 0 ? sep * static_cast<double>(c) + noise : noise);
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

TEST(Metrics, PerfectPredictions) {
  const auto m = metrics_from_confusion({{5, 0}, {0, 7}}, {"a", "b"});
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
}

TEST(Metrics, HandComputedConfusions) {
  EXPECT_DOUBLE_EQ(f1_score(0.5, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(f1_score(0.0, 0.0), 0.0);
  const auto m = metrics_from_confusion({{8, 2}, {2, 8}}, {"a", "b"});
  EXPECT_DOUBLE_EQ(m.per_class[0].precision, 0.8);
  EXPECT_DOUBLE_EQ(m.per_class[1].recall, 0.8);
  EXPECT_DOUBLE_EQ(m.macro_f1, 0.8);
  EXPECT_EQ(m.per_class[0].support, 10u);
  // A class that is never predicted has P = 0 and F1 = 0.
  const auto z = metrics_from_confusion({{0, 4}, {0, 6}}, {"a", "b"});
  EXPECT_DOUBLE_EQ(z.per_class[0].f1, 0.0);
  EXPECT_DOUBLE_EQ(z.per_class[1].f1, 2 * 0.6 / 1.6);
}

TEST(Metrics, EvaluateMatchesBruteForceRecount) {
  const auto train = blobs(4, 30, 0.6, 5, 1);
  const auto test = blobs(4, 25, 0.6, 5, 2);
  const auto model = train_classifier(train, {100, 0.5, 1e-3, 3});
  const auto m = evaluate(model, test);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    const auto& label = model.class_labels[c];
    std::size_t tp = 0, fp = 0, fn = 0, row = 0;
    for (const auto& ex : test) {
      const std::string& predicted = model.predict(ex.features);
      tp += ex.label == label && predicted == label;
      fp += ex.label != label && predicted == label;
      fn += ex.label == label && predicted != label;
      row += ex.label == label;
    }
    correct += tp;
    const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    EXPECT_EQ(m.for_label(label).precision, p);
    EXPECT_EQ(m.for_label(label).recall, r);
    EXPECT_EQ(m.for_label(label).f1, f1);
    std::size_t confusion_row = 0;
    for (auto x : m.confusion[c]) confusion_row += x;
    EXPECT_EQ(confusion_row, row);
  }
  EXPECT_DOUBLE_EQ(m.accuracy, double(correct) / double(test.size()));
  LabeledExample unknown{test.front().features, "nope"};
  EXPECT_WMLAB_ERROR(evaluate(model, std::vector<LabeledExample>{unknown}), ErrorCode::kInvalidInput);
}

TEST(F1Change, RelativeChange) {
  EXPECT_DOUBLE_EQ(f1_change(0.6, 0.6), 0.0);
  EXPECT_NEAR(f1_change(0.9, 0.75), 0.2, 1e-12);
  EXPECT_LT(f1_change(0.5, 0.75), 0.0);
  EXPECT_WMLAB_ERROR(f1_change(0.5, 0.0), ErrorCode::kUndefinedBaseline);
}

TEST(Gradient, MatchesCentralDifferences) {
  const std::size_t classes = 3, dim = 6, n = 40;
  Rng rng(4);
  std::vector<double> w(classes * dim), b(classes), xs(n * dim);
  std::vector<std::size_t> ys(n);
  for (auto& x : w) x = rng.uniform() - 0.5;
  for (auto& x : b) x = rng.uniform() - 0.5;
  for (auto& x : xs) x = 2 * rng.uniform() - 1;
  for (auto& y : ys) y = rng.below(classes);
  const double l2 = 0.01;
  std::vector<double> gw, gb;
  softmax_loss_and_gradient(w, b, xs, ys, dim, l2, &gw, &gb);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = rng.below(w.size());
    auto wp = w, wm = w;
    wp[k] += h;
    wm[k] -= h;
    const double numeric = (softmax_loss_and_gradient(wp, b, xs, ys, dim, l2, nullptr, nullptr) -
                            softmax_loss_and_gradient(wm, b, xs, ys, dim, l2, nullptr, nullptr)) /
                           (2 * h);
    const double rel = std::abs(numeric - gw[k]) / std::max(std::abs(gw[k]), 1e-8);
    EXPECT_LE(rel, 1e-5) << "coordinate " << k;
  }
}

TEST(TrainClassifier, SeparableDataReachesPerfectTrainingAccuracy) {
  const auto data = blobs(2, 50, 3.0, 3, 5);
  const auto model = train_classifier(data, {500, 0.5, 0.0, 1});
  EXPECT_DOUBLE_EQ(evaluate(model, data).accuracy, 1.0);
}

TEST(TrainClassifier, LossNeverIncreases) {
  const auto model = train_classifier(blobs(3, 40, 0.5, 8, 6), {200, 5.0, 1e-3, 2});
  ASSERT_GE(model.loss_history.size(), 2u);
  for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
    EXPECT_LE(model.loss_history[i], model.loss_history[i - 1]);
  }
}

TEST(TrainClassifier, IsDeterministicGivenSeed) {
  const auto data = blobs(3, 20, 1.0, 4, 7);
  EXPECT_TRUE(train_classifier(data, {50, 0.5, 1e-3, 9}) == train_classifier(data, {50, 0.5, 1e-3, 9}));
}

TEST(TrainClassifier, ShuffledLabelsGiveChance) {
  const std::size_t classes = 4;
  auto train = blobs(classes, 100, 2.0, 4, 8);
  auto test = blobs(classes, 100, 2.0, 4, 9);
  Rng rng(10);
  for (auto* set : {&train, &test}) {
    std::vector<std::string> labels;
    for (const auto& ex : *set) labels.push_back(ex.label);
    rng.shuffle(labels);
    for (std::size_t i = 0; i < set->size(); ++i) (*set)[i].label = labels[i];
  }
  const auto m = evaluate(train_classifier(train, {300, 0.5, 1e-3, 1}), test);
  EXPECT_NEAR(m.macro_f1, 1.0 / classes, 0.1);
}

TEST(TrainClassifier, RejectsDegenerateDatasets) {
  EXPECT_WMLAB_ERROR(train_classifier(blobs(1, 20, 1.0, 2, 1)), ErrorCode::kInvalidDataset);
  EXPECT_WMLAB_ERROR(train_classifier(blobs(2, 5, 1.0, 2, 1)), ErrorCode::kInvalidDataset);
  EXPECT_WMLAB_ERROR(train_classifier(std::vector<LabeledExample>{}), ErrorCode::kInvalidDataset);
}

// Feature properties on the four reference-style models.
class FeaturesOnCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lab_ = new Lab(build_lab({testing::corpus_path()},
                             {{"m0", 2, 0.01}, {"m1", 3, 0.05}, {"m2", 3, 0.1}, {"m3", 4, 0.5}}));
  }
  static void TearDownTestSuite() { delete lab_; }
  static FeatureRegistry registry() {
    FeatureRegistry r;
    r.models = lab_->models;
    r.schemes = {{"kgw", SchemeConfig::kgw(kKey)}, {"exp", SchemeConfig::exp(kKey)}};
    r.synonyms = lab_->synonyms;
    return r;
  }
  static inline Lab* lab_ = nullptr;
};

TEST_F(FeaturesOnCorpus, LayoutAndDeterminism) {
  FeatureExtractor fx(registry());
  const auto layout = registry().layout();
  EXPECT_EQ(layout.size(), fx.dimension());
  EXPECT_EQ(layout.size(), 512u + 4 + 2 + 4);
  EXPECT_EQ(layout[512], "log_ppl:m0");
  EXPECT_EQ(layout[516], "z:kgw");
  EXPECT_EQ(layout.back(), "rank:m3");
  const auto text = generate(*lab_->models[0], lab_->prompts[0], 50, Sampler::kMultinomial, 1);
  const auto a = fx.extract(text.ids);
  EXPECT_EQ(a, fx.extract(text.ids));
  EXPECT_EQ(a, extract_features(text.ids, registry()));
  for (double x : a) EXPECT_TRUE(std::isfinite(x));
  EXPECT_WMLAB_ERROR(fx.extract(std::vector<TokenId>{}), ErrorCode::kInvalidInput);
  auto no_z = registry();
  no_z.scheme_features = false;
  EXPECT_EQ(FeatureExtractor(no_z).dimension(), 512u + 8);
}

TEST_F(FeaturesOnCorpus, SourceModelHasLowestPerplexityFeature) {
  FeatureExtractor fx(registry());
  int hits = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const std::size_t m = static_cast<std::size_t>(t) % lab_->models.size();
    const auto text = generate(*lab_->models[m], lab_->prompts[static_cast<std::size_t>(t)], 200,
                               Sampler::kMultinomial, derive_seed(30, t));
    const auto f = fx.extract(text.ids);
    const auto first = f.begin() + 512;
    hits += static_cast<std::size_t>(std::min_element(first, first + 4) - first) == m ? 1 : 0;
  }
  EXPECT_GE(hits, trials * 90 / 100);
}

TEST_F(FeaturesOnCorpus, KgwTextHasLargeZFeature) {
  FeatureExtractor fx(registry());
  Watermarker wm(SchemeConfig::kgw(kKey), lab_->vocab->size());
  int hits = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto& model = *lab_->models[static_cast<std::size_t>(t) % lab_->models.size()];
    const auto text = wm.generate(model, lab_->prompts[static_cast<std::size_t>(t)], 200, derive_seed(31, t));
    hits += fx.extract(text.ids)[516] > 4.0 ? 1 : 0;
  }
  EXPECT_GE(hits, trials * 99 / 100);
}

}  // namespace
}  // namespace wmlab
