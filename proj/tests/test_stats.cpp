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

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "wmlab/stats.hpp"

namespace wmlab {
namespace {

TEST(Stats, MeanAndStddev) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean_of(xs), 5.0);
  EXPECT_NEAR(stddev_of(xs), std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(stddev_of(std::vector<double>{1.0}), 0.0);
  EXPECT_WMLAB_ERROR(mean_of(std::vector<double>{}), ErrorCode::kInvalidInput);
}

TEST(Stats, SignTestDropsTiesAndUsesBinomialTail) {
  const std::vector<double> a{1, 1, 1, 1, 1}, b{0, 0, 0, 0, 0};
  const auto all = sign_test_greater(a, b);
  EXPECT_EQ(all.n, 5u);
  EXPECT_DOUBLE_EQ(all.p_value, 1.0 / 32.0);
  const std::vector<double> c{1, 1, 1, 0, 5}, d{0, 0, 1, 1, 5};
  const auto mixed = sign_test_greater(c, d);
  EXPECT_EQ(mixed.n, 3u);
  EXPECT_DOUBLE_EQ(mixed.statistic, 2.0);
  EXPECT_DOUBLE_EQ(mixed.p_value, 4.0 / 8.0);  // P(X >= 2), X ~ Bin(3, 1/2)
  const auto ties = sign_test_greater(b, b);
  EXPECT_EQ(ties.n, 0u);
  EXPECT_EQ(ties.p_value, 1.0);
}

TEST(Stats, PairedTTest) {
  const std::vector<double> a{5.1, 6.2, 5.9, 7.0, 6.5}, b{5.0, 5.8, 5.7, 6.1, 6.0};
  const auto r = paired_t_test_greater(a, b);
  // d = .1 .4 .2 .9 .5; mean .42, sd sqrt(.097)
  EXPECT_NEAR(r.statistic, 0.42 / (std::sqrt(0.097) / std::sqrt(5.0)), 1e-9);
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LT(r.p_value, 0.05);
  EXPECT_GT(paired_t_test_greater(b, a).p_value, 0.95);
  const std::vector<double> shift{6.1, 7.2, 6.9, 8.0, 7.5};
  EXPECT_EQ(paired_t_test_greater(shift, a).p_value, 0.0);
}

TEST(Stats, ChiSquare) {
  const std::vector<double> obs{50, 30, 20}, exp{50, 30, 20};
  EXPECT_DOUBLE_EQ(chi_square_test(obs, exp).statistic, 0.0);
  EXPECT_DOUBLE_EQ(chi_square_test(obs, exp).p_value, 1.0);
  const std::vector<double> skew{60, 25, 15};
  const auto r = chi_square_test(skew, exp);
  EXPECT_NEAR(r.statistic, 100.0 / 50 + 25.0 / 30 + 25.0 / 20, 1e-12);
  EXPECT_NEAR(r.p_value, std::exp(-r.statistic / 2), 1e-12);  // 2 degrees of freedom
  EXPECT_WMLAB_ERROR(chi_square_test(std::vector<double>{1, 1}, std::vector<double>{0, 2}),
                     ErrorCode::kInvalidInput);
}

TEST(Stats, NonDecreasing) {
  EXPECT_TRUE(non_decreasing(std::vector<double>{1, 1, 2, 3}));
  EXPECT_FALSE(non_decreasing(std::vector<double>{1, 0.99, 2}));
  EXPECT_TRUE(non_decreasing(std::vector<double>{1, 0.99, 2}, 0.02));
}

}  // namespace
}  // namespace wmlab
