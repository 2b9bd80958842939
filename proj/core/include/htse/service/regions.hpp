// core/include/htse/service/regions.hpp

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
#include <string>
#include <utility>
#include <vector>

#include "htse/edit_mask.hpp"
#include "htse/error.hpp"

namespace htse::service {

/// Region in seconds, [start, end).
using Region = std::pair<double, double>;

/// Raised for a region outside [0, duration] or with start >= end.
class RegionError : public InvalidArgument {
 public:
  RegionError(std::size_t index, Region region, const std::string& what)
      : InvalidArgument(what), index(index), region(region) {}
  std::size_t index;
  Region region;
};

/// Validates, snaps to samples (start rounded down, end rounded up), sorts and
/// merges overlapping or touching regions.
std::vector<SampleRange> normalize_regions(const std::vector<Region>& regions,
                                           std::size_t total_len, int sample_rate);
EditMask regions_to_mask(const std::vector<Region>& regions, std::size_t total_len,
                         int sample_rate);
/// Runs of ones as seconds (sample index / rate).
std::vector<Region> mask_to_regions(const EditMask& mask);

}  // namespace htse::service
