// core/include/htse/service/store.hpp

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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

struct sqlite3;

namespace htse::service {

enum class SampleStatus { kPending, kAnnotated, kRefined, kRated };
std::string_view to_string(SampleStatus s);
SampleStatus parse_sample_status(std::string_view s);

struct SessionSample {
  int position = 0;
  std::string sample_id;
  SampleStatus status = SampleStatus::kPending;
  bool familiarization = false;
};

struct Session {
  std::string id;
  std::string annotator_id;
  int familiarization_count = 5;
  std::string created_at;
  std::vector<SessionSample> samples;
};

struct StoredAnnotation {
  std::string session_id;
  std::string sample_id;
  std::string annotator_id;
  /// Normalized regions in seconds.
  std::vector<std::pair<double, double>> regions;
  std::filesystem::path mask_path;
  std::string mask_hash;
  std::string created_at;
};

struct Rating {
  std::string session_id;
  std::string annotator_id;
  std::string sample_id;
  std::string config;
  int mos = 0;
  bool familiarization = false;
  std::string created_at;
};

/// Single-file SQLite persistence for sessions, annotations, served audio and
/// ratings. All methods are serialized on one connection.
class Store {
 public:
  explicit Store(const std::filesystem::path& db_path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  Session create_session(const std::string& annotator_id,
                         const std::vector<std::string>& sample_ids, int familiarization_count);
  std::optional<Session> session(const std::string& session_id) const;
  void set_status(const std::string& session_id, const std::string& sample_id,
                  SampleStatus status);

  /// Last write wins per (session, sample).
  void put_annotation(const StoredAnnotation& a);
  std::optional<StoredAnnotation> annotation(const std::string& session_id,
                                             const std::string& sample_id) const;
  std::vector<StoredAnnotation> annotations() const;

  void mark_served(const std::string& session_id, const std::string& sample_id,
                   const std::string& config);
  bool was_served(const std::string& session_id, const std::string& sample_id,
                  const std::string& config) const;

  /// Last write wins per (session, sample, config).
  void put_rating(const Rating& r);
  /// All ratings; `familiarization` is filled from the session layout.
  std::vector<Rating> ratings() const;

 private:
  void exec(const char* sql) const;
  sqlite3* db_ = nullptr;
  mutable std::mutex mutex_;
};

std::string utc_now();

}  // namespace htse::service
