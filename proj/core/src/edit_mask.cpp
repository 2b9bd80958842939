// core/src/edit_mask.cpp

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

#include "htse/edit_mask.hpp"

#include <algorithm>
#include <fstream>

#include "htse/error.hpp"

namespace htse {

bool EditMask::any() const {
  return std::any_of(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; });
}

std::size_t EditMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; }));
}

void EditMask::fill(std::size_t begin, std::size_t end, std::uint8_t v) {
  if (begin > end || end > values.size()) {
    throw InvalidArgument("EditMask::fill: range out of bounds");
  }
  std::fill(values.begin() + static_cast<std::ptrdiff_t>(begin),
            values.begin() + static_cast<std::ptrdiff_t>(end), v);
}

std::vector<SampleRange> mask_runs(const EditMask& mask) {
  std::vector<SampleRange> runs;
  const std::size_t n = mask.size();
  std::size_t i = 0;
  while (i < n) {
    if (!mask.values[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && mask.values[j]) ++j;
    runs.push_back({i, j});
    i = j;
  }
  return runs;
}

EditMask mask_from_runs(std::size_t total_len, std::span<const SampleRange> runs,
                        int sample_rate) {
  EditMask mask(total_len, 0, sample_rate);
  for (const auto& r : runs) {
    if (r.begin >= r.end || r.end > total_len) {
      throw InvalidArgument("mask region [" + std::to_string(r.begin) + ", " +
                            std::to_string(r.end) + ") invalid for length " +
                            std::to_string(total_len));
    }
    mask.fill(r.begin, r.end, 1);
  }
  return mask;
}

nlohmann::json mask_to_json(const EditMask& mask) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : mask_runs(mask)) regions.push_back({r.begin, r.end});
  return {{"format", "htse-edit-mask"},
          {"version", 1},
          {"sample_rate", mask.sample_rate},
          {"total_len", mask.size()},
          {"regions", regions}};
}

EditMask mask_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string("htse-edit-mask")) != "htse-edit-mask") {
      throw IoError("unexpected mask format tag");
    }
    const int rate = j.at("sample_rate").get<int>();
    const auto total = j.at("total_len").get<std::size_t>();
    std::vector<SampleRange> runs;
    for (const auto& r : j.at("regions")) {
      runs.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
    }
    return mask_from_runs(total, runs, rate);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed mask JSON: ") + e.what());
  }
}

void save_mask(const std::filesystem::path& path, const EditMask& mask) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << mask_to_json(mask).dump() << '\n';
}

EditMask load_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mask " + path.string());
  try {
    return mask_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::uint64_t mask_hash(const EditMask& mask) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  const std::uint64_t n = mask.size();
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(n >> (8 * i)));
  for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(mask.sample_rate >> (8 * i)));
  for (auto v : mask.values) mix(v ? 1 : 0);
  return h;
}

AudioSignal compose_output(const AudioSignal& y_tse, const AudioSignal& y_refine,
                           const EditMask& mask) {
  check_same_length(y_tse.samples, y_refine.samples, "compose_output");
  if (mask.size() != y_tse.size()) {
    throw InvalidArgument("compose_output: mask length " + std::to_string(mask.size()) +
                          " != signal length " + std::to_string(y_tse.size()));
  }
  AudioSignal out = y_tse;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask.values[i]) out.samples[i] = y_refine.samples[i];
  }
  return out;
}

}  // namespace htse
