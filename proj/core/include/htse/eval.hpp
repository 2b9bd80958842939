// core/include/htse/eval.hpp

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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/eval_set.hpp"
#include "htse/masking.hpp"
#include "htse/metric_adapter.hpp"
#include "htse/models.hpp"

namespace htse {

enum class Strategy {
  kTseOnly,        // score y_tse
  kRefine,         // score y_output = E*y_refine + (1-E)*y_tse
  kSuccessiveTse,  // flagged items: run the TSE again on y_tse and score that
  kRefineReplace,  // flagged items: score y_refine
};
std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct MaskSource {
  enum class Kind { kNone, kMaskingFunction, kHuman };
  Kind kind = Kind::kNone;
  /// Masking function; the mask of item i uses rng_seed ^ i.
  MaskingFunctionSpec spec;
  /// Human masks: <dir>/<item id>.json in the edit-mask format.
  std::filesystem::path dir;

  static MaskSource none() { return {}; }
  static MaskSource function(const MaskingFunctionSpec& spec);
  static MaskSource human(std::filesystem::path dir);
  /// "none", the masking kind (e.g. "dBFS-prob"), or "human".
  std::string label() const;
};
/// "none", "human:<dir>" or a masking kind name (defaults for that kind).
MaskSource parse_mask_source(std::string_view s);

struct EvalRow {
  std::string id;
  std::string config;
  std::string mask_source;
  std::optional<double> si_sdr;
  std::optional<double> pesq;
  std::optional<double> dnsmos;
  bool flagged = false;
  std::size_t marked_samples = 0;
  /// Non-empty when the item could not be scored.
  std::string error;
};

struct EvalAggregate {
  std::string config;
  std::size_t count = 0;      // rows scored
  std::size_t flagged = 0;    // rows whose mask has any nonzero sample
  std::size_t errors = 0;
  double mean_si_sdr = 0.0;
  /// Mean over flagged rows (0 when none are flagged).
  double mean_si_sdr_flagged = 0.0;
  std::optional<double> mean_pesq;
  std::optional<double> mean_dnsmos;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<EvalAggregate> aggregates;
  /// Metric tool provenance, keyed by metric name.
  nlohmann::json metrics = nlohmann::json::object();

  const EvalAggregate& aggregate(std::string_view config) const;
  /// Rows of one config, in item order.
  std::vector<const EvalRow*> rows_for(std::string_view config) const;
};

/// Recomputes aggregates from rows.
void summarize(EvalReport& report);
nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
/// PESQ/DNSMOS columns appear only if some row carries the value.
std::string to_csv(const EvalReport& r);
void write_report(const std::filesystem::path& json_path, const EvalReport& r);

struct EvalModels {
  const TseNetwork* tse = nullptr;
  const RefineNetwork* refine = nullptr;
};

struct EvalOptions {
  int threads = 1;
  const ExternalMetric* pesq = nullptr;
  const ExternalMetric* dnsmos = nullptr;
  /// Instrumentation: receives (item id, input signal) for every second TSE
  /// pass of the successive-tse strategy.
  std::function<void(const std::string&, const AudioSignal&)> on_successive_input;
};

/// Masks an evaluation would use, keyed by item id. Human sources are read
/// from disk; a missing file raises InvalidArgument listing every missing id.
std::map<std::string, EditMask> compute_masks(std::span<const EvalItem> items,
                                              const TseNetwork& tse, const MaskSource& source,
                                              int threads = 1);
void save_masks(const std::filesystem::path& dir, const std::map<std::string, EditMask>& masks);

/// Scores several strategies with one shared TSE pass per item. Rows are
/// ordered by strategy, then item. Mask/audio length mismatches produce an
/// error row and the run continues.
EvalReport evaluate_strategies(std::span<const EvalItem> items, const EvalModels& models,
                               const MaskSource& source, std::span<const Strategy> strategies,
                               const EvalOptions& options = {});

EvalReport evaluate_config(std::span<const EvalItem> items, const EvalModels& models,
                           const MaskSource& source, Strategy strategy,
                           const EvalOptions& options = {});

/// evaluate_config with human masks from `mask_dir` and the refine strategy.
EvalReport replay_human_masks(const std::filesystem::path& mask_dir,
                              std::span<const EvalItem> items, const EvalModels& models,
                              const EvalOptions& options = {});

}  // namespace htse
