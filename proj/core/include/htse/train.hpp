// core/include/htse/train.hpp

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
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/corpus.hpp"
#include "htse/error.hpp"
#include "htse/masking.hpp"
#include "htse/mixer.hpp"
#include "htse/models.hpp"
#include "htse/nn/layers.hpp"

namespace htse {

/// Raised when a loss or gradient turns non-finite.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------- optimizer

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Adam with decoupled weight decay: w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + wd * w).
class AdamW {
 public:
  AdamW(std::vector<nn::Parameter*> params, AdamWOptions options = {});
  /// Parameters without an entry in `grads` are still decayed.
  void step(const nn::GradMap& grads, double lr);
  long steps() const { return t_; }

 private:
  struct Moments {
    nn::Matrix m, v;
  };
  std::vector<nn::Parameter*> params_;
  AdamWOptions opt_;
  std::unordered_map<const nn::Parameter*, Moments> state_;
  long t_ = 0;
};

double global_grad_norm(const nn::GradMap& grads);
/// Rescales all gradients so that the global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(nn::GradMap& grads, double max_norm);

// ---------------------------------------------------------------- schedule

/// Reduce-on-plateau. An epoch counts as an improvement when
/// val < best - min_delta; otherwise the stale counter grows, and once it
/// reaches `patience` the multiplier is scaled by `factor` and the counter resets.
class PlateauScheduler {
 public:
  PlateauScheduler(int patience, double factor = 0.5, double min_delta = 1e-4);
  /// Returns true when this observation triggered a reduction.
  bool observe(double val_loss);
  double multiplier() const { return multiplier_; }
  double best() const { return best_; }
  int stale_epochs() const { return stale_; }

 private:
  int patience_;
  double factor_, min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
  double multiplier_ = 1.0;
};

/// Multiplier after replaying `history` through a PlateauScheduler.
double plateau_multiplier(const std::vector<double>& history, int patience,
                          double factor = 0.5, double min_delta = 1e-4);

// ---------------------------------------------------------------- config

enum class TrainStage { kTse, kRefine };
std::string_view to_string(TrainStage s);
TrainStage parse_train_stage(std::string_view s);

struct TrainConfig {
  TrainStage stage = TrainStage::kTse;
  double lr0 = 0.002;
  int plateau_patience = 4;
  double lr_decay = 0.5;
  double min_delta = 1e-4;
  AdamWOptions adamw;
  double grad_clip_norm = 1.0;
  int epochs = 300;
  std::size_t mixtures_per_epoch = 20000;
  std::size_t batch_size = 4;
  std::size_t val_count = 2000;
  /// Worker threads for per-item forward/backward within a batch.
  int threads = 1;
  MaskingFunctionSpec masking = MaskingFunctionSpec::defaults(MaskingKind::kDbfsProb);
  MixConfig mix;
  TseModelConfig tse_model;
  RefineModelConfig refine_model;
  std::uint64_t seed = 0;
  /// Output directory for best.ckpt, last.ckpt and train_log.jsonl.
  std::filesystem::path out_dir = "run";
  /// Frozen TSE checkpoint (stage = refine).
  std::filesystem::path tse_checkpoint;

  /// Stage defaults: tse lr 0.002 / patience 4, refine lr 0.001 / patience 6.
  static TrainConfig defaults(TrainStage stage);
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Missing keys keep the values of `base` (by default the stage defaults).
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

// ---------------------------------------------------------------- runs

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  /// Refine stage: validation negative SI-SDR of y_output (composed output).
  std::optional<double> val_loss_output;
  double lr = 0.0;
  double max_grad_norm = 0.0;
  double wall_time_s = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::filesystem::path log_path;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Stage 1: TSE network and speaker encoder trained jointly on dynamically
/// mixed data with the negative SI-SDR loss.
TrainResult train_tse(const TrainConfig& config, const CorpusIndex& index,
                      const EpochCallback& on_epoch = {});
/// Continues training from an existing network (weights are updated in place).
TrainResult train_tse(const TrainConfig& config, const CorpusIndex& index, TseNetwork& net,
                      const EpochCallback& on_epoch = {});

/// Stage 2: adaptation layer + refinement network with synthetic edit masks
/// from config.masking. The TSE network is frozen; its checksum is verified
/// after every epoch and a change raises Error.
TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const TseNetwork& tse, const EpochCallback& on_epoch = {});
TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const TseNetwork& tse, RefineNetwork& net,
                             const EpochCallback& on_epoch = {});
/// Loads the frozen TSE from config.tse_checkpoint.
TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const EpochCallback& on_epoch = {});

/// Seed of the synthetic mask for one training item. The epoch enters so that
/// dBFS-prob thresholds are redrawn each epoch.
std::uint64_t training_mask_seed(std::uint64_t spec_seed, int epoch, std::size_t item);

}  // namespace htse
