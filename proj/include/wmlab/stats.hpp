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

// Small hypothesis tests used by the experiment assertions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "wmlab/common.hpp"

namespace wmlab {

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

inline double mean_of(std::span<const double> xs) {
  require(!xs.empty(), ErrorCode::kInvalidInput, "mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1); 0 for fewer than two values.
inline double stddev_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// One-sided sign test of H1: a > b. Ties are dropped. statistic = wins.
inline TestOutcome sign_test_greater(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kInvalidInput, "sign test needs paired samples");
  std::size_t wins = 0, n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++n;
    wins += a[i] > b[i] ? 1 : 0;
  }
  TestOutcome out;
  out.statistic = static_cast<double>(wins);
  out.n = n;
  if (n == 0) return out;
  // P(X >= wins) for X ~ Binomial(n, 1/2).
  const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
  out.p_value = wins == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, wins - 1.0));
  return out;
}

// One-sided paired t-test of H1: mean(a - b) > 0.
inline TestOutcome paired_t_test_greater(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, ErrorCode::kInvalidInput,
          "paired t-test needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = mean_of(d);
  const double s = stddev_of(d);
  TestOutcome out;
  out.n = d.size();
  if (s == 0.0) {
    out.statistic = m > 0.0 ? INFINITY : (m < 0.0 ? -INFINITY : 0.0);
    out.p_value = m > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.statistic = m / (s / std::sqrt(static_cast<double>(d.size())));
  const boost::math::students_t_distribution<double> dist(static_cast<double>(d.size() - 1));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

// Pearson goodness of fit; cells with zero expectation must have zero counts.
inline TestOutcome chi_square_test(std::span<const double> observed,
                                   std::span<const double> expected) {
  require(observed.size() == expected.size() && observed.size() >= 2, ErrorCode::kInvalidInput,
          "chi-square needs matching observed/expected with >= 2 cells");
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      require(observed[i] == 0.0, ErrorCode::kInvalidInput,
              "observation in a zero-probability cell");
      continue;
    }
    stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    ++cells;
  }
  TestOutcome out;
  out.statistic = stat;
  out.n = cells;
  require(cells >= 2, ErrorCode::kInvalidInput, "chi-square needs >= 2 populated cells");
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(cells - 1));
  out.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return out;
}

// True when the sequence never decreases by more than `slack`.
inline bool non_decreasing(std::span<const double> xs, double slack = 0.0) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] < xs[i - 1] - slack) return false;
  }
  return true;
}

}  // namespace wmlab
