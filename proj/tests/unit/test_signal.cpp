// tests/unit/test_signal.cpp

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

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "htse/error.hpp"
#include "htse/rng.hpp"
#include "htse/signal.hpp"

namespace htse {
namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, 0.3);
  std::vector<double> v(n);
  for (double& x : v) x = d(g);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// w orthogonal to r with |w|^2 = ratio * |r|^2 (Gram-Schmidt).
std::vector<double> orthogonal_to(const std::vector<double>& r, double ratio, std::uint64_t seed) {
  auto w = random_vec(r.size(), seed);
  const double c = dot(w, r) / dot(r, r);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * r[i];
  const double g = std::sqrt(ratio * dot(r, r) / dot(w, w));
  for (double& x : w) x *= g;
  return w;
}

TEST(Snr, IdenticalIsPositiveSentinel) {
  const auto r = random_vec(100, 1);
  EXPECT_EQ(snr(r, r), kPosInfDb);
}

TEST(Snr, ZeroEstimateIsZeroDb) {
  const auto r = random_vec(100, 2);
  EXPECT_NEAR(snr(std::vector<double>(100, 0.0), r), 0.0, 1e-12);
}

TEST(Snr, TenfoldSmallerNoiseIsTenDb) {
  const auto r = random_vec(1000, 3);
  const auto e = orthogonal_to(r, 0.1, 4);
  std::vector<double> est(r);
  for (std::size_t i = 0; i < r.size(); ++i) est[i] += e[i];
  EXPECT_NEAR(snr(est, r), 10.0, 1e-9);
}

TEST(Snr, Errors) {
  EXPECT_THROW(snr(std::vector<double>(3, 1.0), std::vector<double>(4, 1.0)), InvalidArgument);
  EXPECT_THROW(snr(std::vector<double>(3, 1.0), std::vector<double>(3, 0.0)), InvalidArgument);
  EXPECT_THROW(snr(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
}

TEST(SiSdr, ScaledReferenceIsSentinel) {
  const auto r = random_vec(500, 5);
  std::vector<double> est(r);
  for (double& x : est) x *= 3.7;
  EXPECT_EQ(si_sdr(est, r), kPosInfDb);
}

TEST(SiSdr, OrthogonalEqualEnergyIsZeroDb) {
  const auto r = random_vec(800, 6);
  const auto w = orthogonal_to(r, 1.0, 7);
  std::vector<double> est(r);
  for (std::size_t i = 0; i < r.size(); ++i) est[i] += w[i];
  EXPECT_NEAR(si_sdr(est, r), 0.0, 1e-9);
}

TEST(SiSdr, SignSymmetric) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = random_vec(300, 100 + s);
    auto est = random_vec(300, 200 + s);
    for (std::size_t i = 0; i < r.size(); ++i) est[i] += 0.5 * r[i];
    std::vector<double> neg(est);
    for (double& x : neg) x = -x;
    EXPECT_NEAR(si_sdr(neg, r), si_sdr(est, r), 1e-9);
  }
}

TEST(SiSdr, MatchesBruteForceProjection) {
  const auto r = random_vec(256, 8);
  auto est = random_vec(256, 9);
  for (std::size_t i = 0; i < r.size(); ++i) est[i] += r[i];
  const double a = dot(est, r) / dot(r, r);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    num += a * r[i] * a * r[i];
    den += (est[i] - a * r[i]) * (est[i] - a * r[i]);
  }
  EXPECT_NEAR(si_sdr(est, r), 10.0 * std::log10(num / den), 1e-9);
}

TEST(SiSdr, ZeroMeanOption) {
  auto r = random_vec(256, 10);
  auto est = r;
  for (double& x : est) x += 0.25;  // DC offset only
  EXPECT_LT(si_sdr(est, r), 100.0);
  EXPECT_EQ(si_sdr(est, r, {.zero_mean = true}), kPosInfDb);
}

TEST(SiSdr, ScaleInvariance) {
  Rng rng(11);
  const auto r = random_vec(1000, 12);
  auto est = random_vec(1000, 13);
  for (std::size_t i = 0; i < r.size(); ++i) est[i] += r[i];
  const double base = si_sdr(est, r);
  for (int k = 0; k < 50; ++k) {
    const double alpha = 0.1 + 9.9 * rng.uniform();
    std::vector<double> scaled(est);
    for (double& x : scaled) x *= alpha;
    EXPECT_NEAR(si_sdr(scaled, r), base, 1e-9);
  }
}

TEST(SiSdr, AtLeastSnrWhenOptimalScaleIsOne) {
  // est = r + w with w orthogonal to r has optimal scale exactly 1.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = random_vec(400, 300 + s);
    const auto w = orthogonal_to(r, 0.05 + 0.1 * static_cast<double>(s), 400 + s);
    std::vector<double> est(r);
    for (std::size_t i = 0; i < r.size(); ++i) est[i] += w[i];
    EXPECT_GE(si_sdr(est, r), snr(est, r) - 1e-6);
  }
}

TEST(SiSdr, ZeroReferenceThrows) {
  EXPECT_THROW(si_sdr(std::vector<double>(5, 1.0), std::vector<double>(5, 0.0)), InvalidArgument);
}

TEST(DbfsPower, Examples) {
  EXPECT_DOUBLE_EQ(dbfs_power(std::vector<double>(100, 0.01)), -40.0);
  EXPECT_NEAR(dbfs_power(std::vector<double>(100, 0.02)), 10.0 * std::log10(4e-4), 1e-12);
  EXPECT_NEAR(dbfs_power(std::vector<double>(100, 0.02)), -33.98, 0.005);
  EXPECT_EQ(dbfs_power(std::vector<double>(10, 0.0)), kNegInfDb);
  EXPECT_THROW(dbfs_power(std::vector<double>{}), InvalidArgument);
}

TEST(DbfsPower, GainCovariance) {
  Rng rng(14);
  const auto r = random_vec(777, 15);
  const double base = dbfs_power(r);
  for (int k = 0; k < 50; ++k) {
    const double alpha = 0.01 + 5.0 * rng.uniform();
    std::vector<double> scaled(r);
    for (double& x : scaled) x *= alpha;
    EXPECT_NEAR(dbfs_power(scaled), base + 20.0 * std::log10(alpha), 1e-6);
  }
}

TEST(ScaleToSnr, EnergyRelations) {
  const AudioSignal s(random_vec(1000, 16));
  const AudioSignal n(random_vec(1000, 17));
  const double es = energy(s.samples);
  EXPECT_NEAR(energy(scale_to_snr(s, n, 0.0).samples), es, 1e-9 * es);
  EXPECT_NEAR(energy(scale_to_snr(s, n, 10.0).samples), es / 10.0, 1e-9 * es);
  EXPECT_NEAR(energy(scale_to_snr(s, n, -10.0).samples), es * 10.0, 1e-9 * es);
}

TEST(ScaleToSnr, RoundTrip) {
  Rng rng(18);
  const AudioSignal s(random_vec(2000, 19));
  const AudioSignal n(random_vec(2000, 20));
  for (int k = 0; k < 100; ++k) {
    const double target = -20.0 + 40.0 * rng.uniform();
    const AudioSignal scaled = scale_to_snr(s, n, target);
    EXPECT_NEAR(10.0 * std::log10(energy(s.samples) / energy(scaled.samples)), target, 1e-6);
  }
}

TEST(ScaleToSnr, ZeroEnergyThrows) {
  const AudioSignal s(random_vec(10, 21));
  EXPECT_THROW(scale_to_snr(s, AudioSignal::zeros(10), 0.0), InvalidArgument);
  EXPECT_THROW(scale_to_snr(AudioSignal::zeros(10), s, 0.0), InvalidArgument);
}

TEST(CropOrPad, Identity) {
  Rng rng(22);
  const AudioSignal s(random_vec(100, 23));
  EXPECT_EQ(crop_or_pad(s, 100, PadPlacement::kRandom, rng), s);
}

TEST(CropOrPad, EmptyInputGivesZeros) {
  Rng rng(24);
  const AudioSignal out = crop_or_pad(AudioSignal{}, 80000, PadPlacement::kRandom, rng);
  ASSERT_EQ(out.size(), 80000u);
  EXPECT_EQ(energy(out.samples), 0.0);
}

TEST(CropOrPad, CropIsContiguousSlice) {
  Rng rng(25);
  const AudioSignal s(random_vec(90000, 26));
  for (int k = 0; k < 5; ++k) {
    const AudioSignal out = crop_or_pad(s, 80000, PadPlacement::kRandom, rng);
    ASSERT_EQ(out.size(), 80000u);
    const auto it = std::search(s.samples.begin(), s.samples.end(), out.samples.begin(),
                                out.samples.end());
    EXPECT_NE(it, s.samples.end());
  }
  EXPECT_TRUE(std::equal(s.samples.begin(), s.samples.begin() + 80000,
                         crop_or_pad(s, 80000, PadPlacement::kTail, rng).samples.begin()));
  EXPECT_TRUE(std::equal(s.samples.end() - 80000, s.samples.end(),
                         crop_or_pad(s, 80000, PadPlacement::kHead, rng).samples.begin()));
}

TEST(CropOrPad, PadKeepsSignalContiguousAndZeroesElsewhere) {
  Rng rng(27);
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + static_cast<double>(i);
  const AudioSignal s(v);
  for (int k = 0; k < 10; ++k) {
    const AudioSignal out = crop_or_pad(s, 250, PadPlacement::kRandom, rng);
    const auto first = std::find_if(out.samples.begin(), out.samples.end(),
                                    [](double x) { return x != 0.0; });
    ASSERT_NE(first, out.samples.end());
    EXPECT_TRUE(std::equal(v.begin(), v.end(), first));
    EXPECT_EQ(energy(out.samples), energy(v));
  }
  const AudioSignal tail = crop_or_pad(s, 150, PadPlacement::kTail, rng);
  EXPECT_EQ(tail.samples[0], 1.0);
  const AudioSignal head = crop_or_pad(s, 150, PadPlacement::kHead, rng);
  EXPECT_EQ(head.samples[149], 100.0);
}

TEST(CropOrPad, SeededReproducible) {
  const AudioSignal s(random_vec(1000, 28));
  Rng a(29), b(29);
  EXPECT_EQ(crop_or_pad(s, 700, PadPlacement::kRandom, a),
            crop_or_pad(s, 700, PadPlacement::kRandom, b));
}

TEST(CropOrPad, ZeroTargetThrows) {
  Rng rng(30);
  EXPECT_THROW(crop_or_pad(AudioSignal(random_vec(10, 31)), 0, PadPlacement::kTail, rng),
               InvalidArgument);
}

TEST(CheckFinite, RejectsNan) {
  EXPECT_THROW(check_finite(std::vector<double>{0.0, std::nan("")}, "x"), InvalidArgument);
  EXPECT_NO_THROW(check_finite(std::vector<double>{0.0, 1.0}, "x"));
}

}  // namespace
}  // namespace htse
