// core/include/htse/stats.hpp

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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace htse {

struct TTestResult {
  double t = 0.0;
  /// Two-sided p-value.
  double p = 1.0;
  std::size_t df = 0;
  double mean_diff = 0.0;
};

/// Paired two-sided t-test on d_i = a_i - b_i. Throws InvalidArgument for
/// mismatched or too-short inputs and for zero variance of the differences.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with df degrees.
double student_t_two_sided_p(double t, double df);

struct StratifyOptions {
  double bin_width_db = 2.0;
  /// Only scores in [lo_db, hi_db) are eligible. The default window is
  /// centred on 0 dB.
  double lo_db = -10.0;
  double hi_db = 10.0;
  std::uint64_t seed = 0;
};

/// Picks `count` indices so that SI-SDR bins of width bin_width_db are filled
/// as evenly as possible (round robin over bins, seeded random order inside a
/// bin). Returns fewer indices when not enough scores are eligible. The result
/// is sorted.
std::vector<std::size_t> stratified_subset(std::span<const double> scores, std::size_t count,
                                           const StratifyOptions& options = {});

}  // namespace htse
