// core/src/corpus.cpp

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

#include "htse/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "htse/error.hpp"
#include "htse/wav.hpp"

namespace fs = std::filesystem;

namespace htse {

CorpusLayout parse_corpus_layout(std::string_view name) {
  if (name == "speaker-dirs") return CorpusLayout::kSpeakerDirs;
  if (name == "manifest") return CorpusLayout::kManifest;
  throw InvalidArgument("unknown corpus layout '" + std::string(name) + "'");
}

std::vector<std::string> CorpusIndex::speaker_ids() const {
  std::vector<std::string> ids;
  ids.reserve(speakers.size());
  for (const auto& [id, _] : speakers) ids.push_back(id);
  return ids;
}

std::size_t CorpusIndex::utterance_count() const {
  std::size_t n = 0;
  for (const auto& [_, utts] : speakers) n += utts.size();
  return n;
}

namespace {

std::vector<fs::path> wavs_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void finalize(CorpusIndex& index) {
  for (auto it = index.speakers.begin(); it != index.speakers.end();) {
    auto& utts = it->second;
    std::sort(utts.begin(), utts.end());
    if (utts.size() < 2) {
      ++index.excluded_speakers;
      it = index.speakers.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(index.noise.begin(), index.noise.end());
  if (index.excluded_speakers > 0) {
    spdlog::warn("corpus {}: excluded {} speaker(s) with fewer than 2 utterances",
                 index.root.string(), index.excluded_speakers);
  }
  if (index.speakers.empty()) {
    throw InvalidArgument("corpus " + index.root.string() + " has no usable speakers");
  }
}

}  // namespace

CorpusIndex build_index(const fs::path& root, CorpusLayout layout,
                        const IndexOptions& options) {
  if (!fs::is_directory(root)) throw IoError("corpus root is not a directory: " + root.string());
  CorpusIndex index;
  index.root = root;

  if (layout == CorpusLayout::kSpeakerDirs) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      if (d.filename() == options.noise_subdir) {
        index.noise = wavs_under(d);
      } else {
        auto utts = wavs_under(d);
        index.speakers[d.filename().string()] = std::move(utts);
      }
    }
  } else {
    const fs::path manifest = root / options.manifest_name;
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open corpus manifest " + manifest.string());
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw IoError(manifest.string() + ":" + std::to_string(lineno) +
                      ": expected '<speaker>\\t<path>'");
      }
      std::string speaker = line.substr(0, tab);
      fs::path p = line.substr(tab + 1);
      if (p.is_relative()) p = root / p;
      if (!seen.emplace(speaker, p.lexically_normal().string()).second) {
        ++index.duplicate_entries;
        continue;
      }
      if (speaker == "-") {
        index.noise.push_back(p.lexically_normal());
      } else {
        index.speakers[speaker].push_back(p.lexically_normal());
      }
    }
    if (index.duplicate_entries > 0) {
      spdlog::warn("corpus manifest {}: dropped {} duplicate entr{}", manifest.string(),
                   index.duplicate_entries, index.duplicate_entries == 1 ? "y" : "ies");
    }
  }
  finalize(index);
  return index;
}

std::shared_ptr<const AudioSignal> AudioCache::load(const fs::path& path) {
  const std::string key = path.string();
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto sig = std::make_shared<const AudioSignal>(read_wav(path, expected_rate_));
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(sig)).first->second;
}

std::size_t AudioCache::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace htse
