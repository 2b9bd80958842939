// tests/support/toy_fixture.hpp

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

#include "htse/corpus.hpp"
#include "htse/toy_corpus.hpp"
#include "temp_dir.hpp"

namespace htse::test {

/// Small synthetic corpus on disk, plus its index.
struct ToyCorpus {
  TempDir dir;
  CorpusIndex index;

  explicit ToyCorpus(int speakers = 4, int utterances = 3, double seconds = 1.5) {
    ToyCorpusConfig cfg;
    cfg.speakers = speakers;
    cfg.utterances_per_speaker = utterances;
    cfg.utterance_s = seconds;
    cfg.noise_files = 2;
    cfg.noise_s = 2.0;
    generate_toy_corpus(dir.path(), cfg);
    index = build_index(dir.path(), CorpusLayout::kSpeakerDirs);
  }
};

}  // namespace htse::test
