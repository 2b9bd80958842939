// tests/unit/test_stats.cpp

// Copyright 2026  The htse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "htse/error.hpp"
#include "htse/stats.hpp"
#include "oracles.hpp"

namespace htse {
namespace {

TEST(StudentT, KnownValues) {
  // t = 2.228 is the two-sided 5% critical value at 10 degrees of freedom.
  EXPECT_NEAR(student_t_two_sided_p(2.228138851986, 10.0), 0.05, 1e-9);
  EXPECT_NEAR(student_t_two_sided_p(12.7062047361747, 1.0), 0.05, 1e-9);
  EXPECT_DOUBLE_EQ(student_t_two_sided_p(0.0, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(student_t_two_sided_p(INFINITY, 5.0), 0.0);
  EXPECT_THROW(student_t_two_sided_p(1.0, 0.0), InvalidArgument);
}

TEST(StudentT, SymmetricInT) {
  for (double t : {0.3, 1.1, 2.5, 4.0}) {
    EXPECT_DOUBLE_EQ(student_t_two_sided_p(t, 7.0), student_t_two_sided_p(-t, 7.0));
  }
}

TEST(PairedT, MatchesTextbookOracle) {
  std::mt19937_64 gen(42);
  for (int c = 0; c < 30; ++c) {
    const std::size_t n = 3 + gen() % 40;
    std::normal_distribution<double> nd(0.0, 1.0);
    const double shift = (static_cast<double>(gen() % 200) - 100.0) / 100.0;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = 5.0 * nd(gen);
      a[i] = b[i] + shift + nd(gen);
    }
    const TTestResult r = paired_t_test(a, b);
    const oracle::PairedT o = oracle::paired_t(a, b);
    EXPECT_EQ(r.df, n - 1);
    EXPECT_NEAR(r.t, o.t, 1e-9 * std::max(1.0, std::abs(o.t)));
    EXPECT_NEAR(r.p, o.p, 1e-6);
  }
}

TEST(PairedT, SwappingArgumentsNegatesT) {
  const std::vector<double> a{1.0, 2.5, 3.1, 4.0, 2.2};
  const std::vector<double> b{0.5, 2.0, 3.3, 3.0, 1.9};
  const auto ab = paired_t_test(a, b);
  const auto ba = paired_t_test(b, a);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
  EXPECT_NEAR(ab.mean_diff, 0.42, 1e-12);
}

TEST(PairedT, RejectsBadInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(paired_t_test(one, one), InvalidArgument);
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{1.0, 2.0};
  EXPECT_THROW(paired_t_test(a, b), InvalidArgument);
  const std::vector<double> c{2.0, 3.0, 4.0};
  EXPECT_THROW(paired_t_test(c, a), InvalidArgument);  // constant difference
}

TEST(StratifiedSubset, FillsBinsEvenly) {
  std::vector<double> scores;
  for (int i = 0; i < 50; ++i) scores.push_back(-9.5);  // bin 0
  for (int i = 0; i < 3; ++i) scores.push_back(0.5);    // bin 5
  for (int i = 0; i < 50; ++i) scores.push_back(9.0);   // bin 9
  scores.push_back(12.0);                               // ineligible
  const auto picked = stratified_subset(scores, 20);
  ASSERT_EQ(picked.size(), 20u);
  int low = 0, mid = 0, high = 0;
  for (auto i : picked) {
    ASSERT_LT(i, scores.size() - 1);
    if (scores[i] < -5) ++low;
    else if (scores[i] < 5) ++mid;
    else ++high;
  }
  EXPECT_EQ(mid, 3);
  EXPECT_LE(std::abs(low - high), 1);
  EXPECT_TRUE(std::is_sorted(picked.begin(), picked.end()));
  EXPECT_EQ(std::set<std::size_t>(picked.begin(), picked.end()).size(), picked.size());
}

TEST(StratifiedSubset, ShortfallAndDeterminism) {
  const std::vector<double> scores{-20.0, 0.0, 1.0, 3.0, 30.0};
  EXPECT_EQ(stratified_subset(scores, 10).size(), 3u);
  std::vector<double> many(200);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = -10.0 + 0.1 * static_cast<double>(i);
  StratifyOptions o;
  o.seed = 9;
  EXPECT_EQ(stratified_subset(many, 30, o), stratified_subset(many, 30, o));
  o.bin_width_db = 0.0;
  EXPECT_THROW(stratified_subset(many, 3, o), InvalidArgument);
}

}  // namespace
}  // namespace htse
