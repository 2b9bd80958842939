// core/include/htse/toy_corpus.hpp

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

#include "htse/signal.hpp"

namespace htse {

/// Synthetic "speech" corpus for desk-scale experiments: each speaker has its
/// own pitch range, vocal-tract scale and spectral tilt; utterances are
/// sequences of harmonic vowel-like syllables separated by pauses.
struct ToyCorpusConfig {
  int speakers = 12;
  int utterances_per_speaker = 8;
  double utterance_s = 3.0;
  int noise_files = 4;
  double noise_s = 6.0;
  int sample_rate = kCanonicalSampleRate;
  std::uint64_t seed = 7;
};

/// Writes root/spkNN/uttNN.wav and root/_noise/noiseNN.wav.
void generate_toy_corpus(const std::filesystem::path& root, const ToyCorpusConfig& config);

/// One utterance of the given speaker (deterministic in both arguments).
AudioSignal synthesize_toy_utterance(int speaker, std::uint64_t utterance_seed,
                                     const ToyCorpusConfig& config);

}  // namespace htse
