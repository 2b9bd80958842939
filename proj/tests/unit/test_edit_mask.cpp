// tests/unit/test_edit_mask.cpp

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

#include <random>

#include <gtest/gtest.h>

#include "htse/edit_mask.hpp"
#include "htse/error.hpp"
#include "temp_dir.hpp"

namespace htse {
namespace {

EditMask random_mask(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  EditMask m(n, 0);
  std::uint8_t v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g() % 50 == 0) v ^= 1;
    m.values[i] = v;
  }
  return m;
}

TEST(EditMask, RunsRoundTrip) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const EditMask m = random_mask(5000, s);
    const auto runs = mask_runs(m);
    for (std::size_t i = 1; i < runs.size(); ++i) EXPECT_LT(runs[i - 1].end, runs[i].begin);
    EXPECT_EQ(mask_from_runs(m.size(), runs), m);
  }
}

TEST(EditMask, RunsEdgeCases) {
  EXPECT_TRUE(mask_runs(EditMask(10, 0)).empty());
  const auto all = mask_runs(EditMask(10, 1));
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0], (SampleRange{0, 10}));
  const std::vector<SampleRange> bad{{5, 20}};
  EXPECT_THROW(mask_from_runs(10, bad), InvalidArgument);
}

TEST(EditMask, JsonLayout) {
  EditMask m(100, 0);
  m.fill(10, 20, 1);
  m.fill(50, 100, 1);
  const auto j = mask_to_json(m);
  EXPECT_EQ(j.at("format"), "htse-edit-mask");
  EXPECT_EQ(j.at("sample_rate"), 16000);
  EXPECT_EQ(j.at("total_len"), 100);
  EXPECT_EQ(j.at("regions"), nlohmann::json::parse("[[10,20],[50,100]]"));
  EXPECT_EQ(mask_from_json(j), m);
}

TEST(EditMask, FileRoundTripAndHash) {
  test::TempDir dir;
  const EditMask m = random_mask(16000, 3);
  save_mask(dir.path() / "m.json", m);
  const EditMask back = load_mask(dir.path() / "m.json");
  EXPECT_EQ(back, m);
  EXPECT_EQ(mask_hash(back), mask_hash(m));
  EditMask other = m;
  other.values[123] ^= 1;
  EXPECT_NE(mask_hash(other), mask_hash(m));
  EXPECT_NE(mask_hash(EditMask(10, 0)), mask_hash(EditMask(11, 0)));
}

TEST(EditMask, JsonRejectsMalformed) {
  auto j = mask_to_json(EditMask(10, 0));
  j["regions"] = nlohmann::json::parse("[[3,2]]");
  EXPECT_THROW(mask_from_json(j), InvalidArgument);
  j["regions"] = nlohmann::json::parse("[[0,11]]");
  EXPECT_THROW(mask_from_json(j), InvalidArgument);
  EXPECT_THROW(mask_from_json(nlohmann::json::object()), Error);
  EXPECT_THROW(load_mask("/nonexistent/m.json"), IoError);
}

TEST(ComposeOutput, SelectsPerSampleBitExactly) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1000 + g() % 1000;
    AudioSignal a = AudioSignal::zeros(n), b = AudioSignal::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
      a.samples[i] = u(g);
      b.samples[i] = u(g);
    }
    const EditMask m = random_mask(n, g());
    const AudioSignal y = compose_output(a, b, m);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(y.samples[i], m.values[i] ? b.samples[i] : a.samples[i]);
    }
  }
}

TEST(ComposeOutput, EmptyMaskIsIdentity) {
  const AudioSignal a(std::vector<double>{0.1, -0.2, 0.3});
  const AudioSignal b(std::vector<double>{9.0, 9.0, 9.0});
  EXPECT_EQ(compose_output(a, b, EditMask(3, 0)), a);
  EXPECT_EQ(compose_output(a, b, EditMask(3, 1)), b);
}

TEST(ComposeOutput, LengthMismatchThrows) {
  const AudioSignal a = AudioSignal::zeros(3);
  EXPECT_THROW(compose_output(a, AudioSignal::zeros(4), EditMask(3, 0)), InvalidArgument);
  EXPECT_THROW(compose_output(a, a, EditMask(4, 0)), InvalidArgument);
}

}  // namespace
}  // namespace htse
