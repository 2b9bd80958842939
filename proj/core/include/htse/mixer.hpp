// core/include/htse/mixer.hpp

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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/corpus.hpp"
#include "htse/signal.hpp"

namespace htse {

enum class SnrMode {
  /// Every interferer and the noise get their own uniform SNR draw.
  kPerComponent,
  /// One draw sets the SNR of the target against the summed interference.
  kGlobal,
};

struct MixConfig {
  int k_speakers = 2;  // total speakers in the mixture, target included
  bool with_noise = false;
  double duration_s = 5.0;
  double snr_lo_db = -10.0;
  double snr_hi_db = 10.0;
  SnrMode snr_mode = SnrMode::kPerComponent;
  PadPlacement placement = PadPlacement::kRandom;
  int sample_rate = kCanonicalSampleRate;

  std::size_t num_samples() const;
};

nlohmann::json to_json(const MixConfig& c);
MixConfig mix_config_from_json(const nlohmann::json& j, MixConfig base = {});

struct MixtureSources {
  std::filesystem::path target;
  std::filesystem::path enrollment;
  std::vector<std::filesystem::path> interferers;
  std::vector<std::string> interferer_speakers;
  std::optional<std::filesystem::path> noise;
};

/// x = s0 + sum_i s_i + n, all at the same length and rate.
struct MixtureSample {
  AudioSignal mixture;
  AudioSignal target_clean;
  std::vector<AudioSignal> interferers;
  std::optional<AudioSignal> noise;
  AudioSignal enrollment;
  std::string target_speaker_id;
  /// Target-vs-component SNRs in dB: interferers first, then noise.
  std::vector<double> mix_snrs;
  std::uint64_t seed = 0;
  MixtureSources sources;

  /// Recomputes the mixture from its components.
  void rebuild_mixture();
};

/// Draws one sample; fully determined by (index contents, config, seed).
MixtureSample make_mixture(const CorpusIndex& index, AudioCache& cache,
                           const MixConfig& config, std::uint64_t seed);

/// Scales every component by `gain` (SNRs unchanged) and rebuilds the mixture.
void apply_common_gain(MixtureSample& sample, double gain);

}  // namespace htse
