// core/src/stats.cpp

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

#include "htse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "htse/error.hpp"
#include "htse/rng.hpp"

namespace htse {

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("student_t_two_sided_p: df must be positive");
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("paired_t_test: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw InvalidArgument("paired_t_test: need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  // Relative floor so a constant shift with rounding noise is still degenerate.
  const double scale = std::max(std::abs(mean), 1.0);
  if (!(var > 1e-24 * scale * scale)) {
    throw InvalidArgument("paired_t_test: differences have zero variance");
  }
  TTestResult r;
  r.df = n - 1;
  r.mean_diff = mean;
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  r.p = student_t_two_sided_p(r.t, static_cast<double>(r.df));
  return r;
}

std::vector<std::size_t> stratified_subset(std::span<const double> scores, std::size_t count,
                                           const StratifyOptions& opt) {
  if (!(opt.bin_width_db > 0.0)) throw InvalidArgument("stratified_subset: bad bin width");
  std::map<long, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!(s >= opt.lo_db && s < opt.hi_db)) continue;
    bins[static_cast<long>(std::floor((s - opt.lo_db) / opt.bin_width_db))].push_back(i);
  }
  Rng rng(opt.seed);
  for (auto& [bin, members] : bins) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t round = 0; out.size() < count; ++round) {
    bool any = false;
    for (auto& [bin, members] : bins) {
      if (round < members.size() && out.size() < count) {
        out.push_back(members[round]);
        any = true;
      }
    }
    if (!any) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace htse
