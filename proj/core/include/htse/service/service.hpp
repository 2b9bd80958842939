// core/include/htse/service/service.hpp

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

namespace htse::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Materialized eval set (manifest.json + samples/).
  std::filesystem::path eval_set_dir;
  std::filesystem::path tse_checkpoint;
  std::filesystem::path refine_checkpoint;
  /// SQLite database, mask files and audio cache live here.
  std::filesystem::path data_dir = "annotation-data";
  /// UI bundle served at "/" when set.
  std::filesystem::path static_dir;
  int familiarization_count = 5;
  /// Concurrent refinement inferences; further requests wait.
  int refine_workers = 2;
  int http_threads = 8;
};

/// Keys mirror the struct fields. Environment overrides applied afterwards:
/// HTSE_HOST, HTSE_PORT, HTSE_EVAL_SET, HTSE_TSE_CKPT, HTSE_REFINE_CKPT,
/// HTSE_DATA_DIR, HTSE_STATIC_DIR, HTSE_FAMILIARIZATION, HTSE_REFINE_WORKERS.
ServiceConfig service_config_from_json(const nlohmann::json& j, ServiceConfig base = {});
void apply_env_overrides(ServiceConfig& c);
nlohmann::json to_json(const ServiceConfig& c);

/// HTTP backend of the annotation loop.
///
///   POST /sessions                         {annotator_id, sample_ids?, familiarization_count?}
///   GET  /sessions/{sid}                   session layout and statuses
///   GET  /sessions/{sid}/next              next unrated sample or {"done": true}
///   GET  /samples/{id}/audio/{kind}?session=SID
///        kind: mixture | enrollment | tse | refine | refine-replace (refine kinds need &mask=HASH)
///   POST /samples/{id}/annotation          {session_id, regions: [[start_s, end_s], ...]}
///   GET  /samples/{id}/annotation?session=SID
///   POST /samples/{id}/refine              {session_id}
///   POST /samples/{id}/rating              {session_id, config, mos}
///   GET  /export/ratings                   analysis rows (familiarization excluded) + MOS means
///   GET  /export/annotations               analysis rows (familiarization excluded)
///   GET  /health
class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;
  bool models_loaded() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace htse::service
