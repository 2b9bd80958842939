// core/include/htse/edit_mask.hpp

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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/signal.hpp"

namespace htse {

/// Per-sample binary edit mask. 1 marks a sample for refinement.
struct EditMask {
  std::vector<std::uint8_t> values;
  int sample_rate = kCanonicalSampleRate;

  EditMask() = default;
  EditMask(std::size_t n, std::uint8_t fill, int rate = kCanonicalSampleRate)
      : values(n, fill), sample_rate(rate) {}

  std::size_t size() const { return values.size(); }
  bool any() const;
  std::size_t count() const;
  void fill(std::size_t begin, std::size_t end, std::uint8_t v);

  friend bool operator==(const EditMask&, const EditMask&) = default;
};

/// Half-open sample interval [begin, end).
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

/// Maximal runs of ones, in ascending order.
std::vector<SampleRange> mask_runs(const EditMask& mask);
EditMask mask_from_runs(std::size_t total_len, std::span<const SampleRange> runs,
                        int sample_rate = kCanonicalSampleRate);

/// JSON layout:
///   {"format": "htse-edit-mask", "version": 1, "sample_rate": 16000,
///    "total_len": 80000, "regions": [[start, end], ...]}
/// Regions are the [start, end) sample runs of ones.
nlohmann::json mask_to_json(const EditMask& mask);
EditMask mask_from_json(const nlohmann::json& j);
void save_mask(const std::filesystem::path& path, const EditMask& mask);
EditMask load_mask(const std::filesystem::path& path);

/// 64-bit FNV-1a over the mask bytes plus length and rate.
std::uint64_t mask_hash(const EditMask& mask);

/// y_output = E * y_refine + (1 - E) * y_tse, evaluated as a per-sample
/// select so unmarked samples are copied bit-exactly from y_tse.
AudioSignal compose_output(const AudioSignal& y_tse, const AudioSignal& y_refine,
                           const EditMask& mask);

}  // namespace htse
