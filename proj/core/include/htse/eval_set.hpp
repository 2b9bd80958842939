// core/include/htse/eval_set.hpp

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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/mixer.hpp"

namespace htse {

struct EvalItem {
  std::string id;
  MixtureSample sample;
  /// Relative WAV paths inside the eval-set directory.
  std::filesystem::path mixture_file;
  std::filesystem::path target_file;
  std::filesystem::path enrollment_file;
};

struct EvalSet {
  std::filesystem::path dir;
  MixConfig config;
  std::uint64_t seed = 0;
  std::vector<EvalItem> items;

  const EvalItem& find(const std::string& id) const;
};

std::string eval_item_id(std::size_t index);

/// Writes `count` mixtures (16-bit WAV) plus manifest.json under out_dir.
/// Components are gain-normalized to avoid clipping and quantized before the
/// mixture is summed, so the stored mixture equals the sum of the stored
/// components. Same seed => byte-identical files.
nlohmann::json materialize_eval_set(const CorpusIndex& index, AudioCache& cache,
                                    const MixConfig& config, std::size_t count,
                                    std::uint64_t seed,
                                    const std::filesystem::path& out_dir);

/// Loads a materialized set (manifest + audio).
EvalSet load_eval_set(const std::filesystem::path& dir);

/// In-memory counterpart used for validation sets during training.
std::vector<EvalItem> generate_eval_items(const CorpusIndex& index, AudioCache& cache,
                                          const MixConfig& config, std::size_t count,
                                          std::uint64_t seed);

}  // namespace htse
