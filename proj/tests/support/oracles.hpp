// tests/support/oracles.hpp

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

#pragma once

// Independent brute-force reference implementations used as test oracles.
// They deliberately avoid the library's helpers (windowing, metrics).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "htse/masking.hpp"
#include "htse/rng.hpp"

namespace htse::oracle {

/// Window dissimilarity straight from the definitions.
inline double g(MaskingKind kind, const std::vector<double>& a, const std::vector<double>& b,
                std::size_t begin, std::size_t end) {
  const double n = static_cast<double>(end - begin);
  switch (kind) {
    case MaskingKind::kMeanAE: {
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += std::fabs(a[i] - b[i]);
      return s / n;
    }
    case MaskingKind::kMaxAE: {
      double m = 0.0;
      for (std::size_t i = begin; i < end; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
      return m;
    }
    default: {
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      if (s == 0.0) return -1e300;
      return 10.0 * std::log10(s / n);
    }
  }
}

/// Brute-force masking function. dBFS-prob consumes one Rng::normal draw per
/// window in window order.
inline std::vector<std::uint8_t> mask(const std::vector<double>& a, const std::vector<double>& b,
                                      const MaskingFunctionSpec& spec) {
  const std::size_t t = a.size();
  std::vector<std::uint8_t> m(t, 0);
  if (t == 0) return m;
  if (spec.kind == MaskingKind::kGlobalSnr) {
    double ref = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      ref += b[i] * b[i];
      noise += (b[i] - a[i]) * (b[i] - a[i]);
    }
    const double snr = noise == 0.0 ? 1e300 : 10.0 * std::log10(ref / noise);
    if (-snr > spec.threshold) std::fill(m.begin(), m.end(), 1);
    return m;
  }
  Rng rng(spec.rng_seed);
  for (std::size_t begin = 0; begin < t; begin += spec.window_len) {
    const std::size_t end = std::min(t, begin + spec.window_len);
    double tau = spec.threshold;
    if (spec.kind == MaskingKind::kDbfsProb) tau += spec.threshold_sigma * rng.normal();
    if (g(spec.kind, a, b, begin, end) > tau) {
      for (std::size_t i = begin; i < end; ++i) m[i] = 1;
    }
  }
  return m;
}

/// Mean of mask samples in [j*stride, min(j*stride + kernel, T)).
inline std::vector<double> downsample(const std::vector<std::uint8_t>& m, std::size_t stride,
                                      std::size_t kernel, std::size_t frames) {
  std::vector<double> out(frames, 0.0);
  for (std::size_t j = 0; j < frames; ++j) {
    const std::size_t b = j * stride, e = std::min(m.size(), j * stride + kernel);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += m[i];
    out[j] = e > b ? s / static_cast<double>(e - b) : 0.0;
  }
  return out;
}

/// Two-sided p-value of Student's t by composite Simpson quadrature of the
/// density from 0 to |t|.
inline double student_t_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) /
                   std::sqrt(df * 3.14159265358979323846);
  auto pdf = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
  const double a = std::fabs(t);
  const int n = 200000;
  const double h = a / n;
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
  const double half = s * h / 3.0;  // P(0 < T < |t|)
  return std::max(0.0, 1.0 - 2.0 * half);
}

struct PairedT {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Textbook paired t statistic on the differences.
inline PairedT paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  PairedT r;
  r.df = static_cast<double>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_p(r.t, r.df);
  return r;
}

}  // namespace htse::oracle
