// core/src/service/regions.cpp

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

#include "htse/service/regions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace htse::service {

std::vector<SampleRange> normalize_regions(const std::vector<Region>& regions,
                                           std::size_t total_len, int sample_rate) {
  const double duration = static_cast<double>(total_len) / sample_rate;
  std::vector<SampleRange> snapped;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto [a, b] = regions[i];
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b > duration || !(a < b)) {
      throw RegionError(i, regions[i],
                        "region " + std::to_string(i) + " [" + std::to_string(a) + ", " +
                            std::to_string(b) + ") is outside [0, " + std::to_string(duration) +
                            ") or empty");
    }
    const auto begin = static_cast<std::size_t>(std::floor(a * sample_rate));
    const auto end = std::min(total_len, static_cast<std::size_t>(std::ceil(b * sample_rate)));
    snapped.push_back({begin, end});
  }
  std::sort(snapped.begin(), snapped.end(),
            [](const SampleRange& x, const SampleRange& y) { return x.begin < y.begin; });
  std::vector<SampleRange> merged;
  for (const auto& r : snapped) {
    if (!merged.empty() && r.begin <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, r.end);
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

EditMask regions_to_mask(const std::vector<Region>& regions, std::size_t total_len,
                         int sample_rate) {
  const auto runs = normalize_regions(regions, total_len, sample_rate);
  return mask_from_runs(total_len, runs, sample_rate);
}

std::vector<Region> mask_to_regions(const EditMask& mask) {
  std::vector<Region> out;
  for (const auto& r : mask_runs(mask)) {
    out.emplace_back(static_cast<double>(r.begin) / mask.sample_rate,
                     static_cast<double>(r.end) / mask.sample_rate);
  }
  return out;
}

}  // namespace htse::service
