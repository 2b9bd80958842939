// core/include/htse/checkpoint.hpp

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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "htse/models.hpp"
#include "htse/nn/layers.hpp"

namespace htse {

/// Binary checkpoint layout (little endian):
///   "HTSECKPT" | u32 version | u64 header_len | header JSON
///   | u32 count | count x (u32 name_len | name | u64 rows | u64 cols | f64[rows*cols])
/// The header holds {"kind": "tse"|"refine", "config": {...}, ...}.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::string kind;
  nlohmann::json config;
  /// Free-form extras (training epoch, val loss, parent checksum).
  nlohmann::json meta = nlohmann::json::object();
};

void save_parameters(const std::filesystem::path& path, const CheckpointHeader& header,
                     const nn::ParameterStore& params);
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);
/// Loads values into existing parameters; names and shapes must match exactly.
CheckpointHeader load_parameters(const std::filesystem::path& path, nn::ParameterStore& params);

/// FNV-1a over parameter names, shapes and raw value bytes.
std::uint64_t params_checksum(const nn::ParameterStore& params);
std::string checksum_hex(std::uint64_t v);

void save_tse(const std::filesystem::path& path, const TseNetwork& net,
              nlohmann::json meta = nlohmann::json::object());
std::unique_ptr<TseNetwork> load_tse(const std::filesystem::path& path);

/// The refinement checkpoint also records the TSE config it was trained against.
void save_refine(const std::filesystem::path& path, const RefineNetwork& net,
                 nlohmann::json meta = nlohmann::json::object());
std::unique_ptr<RefineNetwork> load_refine(const std::filesystem::path& path);

}  // namespace htse
