// core/include/htse/corpus.hpp

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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htse/signal.hpp"

namespace htse {

enum class CorpusLayout {
  /// root/<speaker_id>/**/*.wav, plus root/<noise_subdir>/**/*.wav for noise.
  kSpeakerDirs,
  /// root/manifest.tsv with "<speaker_id>\t<path>" lines; speaker "-" marks noise.
  kManifest,
};

CorpusLayout parse_corpus_layout(std::string_view name);

struct CorpusIndex {
  std::filesystem::path root;
  /// Sorted by speaker id; each list sorted and free of duplicates.
  std::map<std::string, std::vector<std::filesystem::path>> speakers;
  std::vector<std::filesystem::path> noise;
  /// Speakers dropped for having fewer than two utterances.
  std::size_t excluded_speakers = 0;
  /// Manifest entries dropped as exact duplicates.
  std::size_t duplicate_entries = 0;

  std::vector<std::string> speaker_ids() const;
  std::size_t utterance_count() const;
};

struct IndexOptions {
  std::string noise_subdir = "_noise";
  std::string manifest_name = "manifest.tsv";
};

/// Deterministic (sorted) index. Throws when no usable speakers remain.
CorpusIndex build_index(const std::filesystem::path& root, CorpusLayout layout,
                        const IndexOptions& options = {});

/// Thread-safe memoizing WAV loader shared by data-loading code paths.
class AudioCache {
 public:
  explicit AudioCache(int expected_rate = kCanonicalSampleRate)
      : expected_rate_(expected_rate) {}

  std::shared_ptr<const AudioSignal> load(const std::filesystem::path& path);
  std::size_t size() const;

 private:
  int expected_rate_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const AudioSignal>> cache_;
};

}  // namespace htse
