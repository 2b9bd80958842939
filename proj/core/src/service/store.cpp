// core/src/service/store.cpp

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

#include "htse/service/store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <random>

#include <nlohmann/json.hpp>
#include <sqlite3.h>

#include "htse/error.hpp"

namespace htse::service {

namespace {

constexpr const char* kSchema = R"sql(
PRAGMA journal_mode = WAL;
CREATE TABLE IF NOT EXISTS sessions (
  id TEXT PRIMARY KEY,
  annotator_id TEXT NOT NULL,
  familiarization_count INTEGER NOT NULL,
  created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS session_samples (
  session_id TEXT NOT NULL,
  position INTEGER NOT NULL,
  sample_id TEXT NOT NULL,
  status TEXT NOT NULL,
  PRIMARY KEY (session_id, position)
);
CREATE TABLE IF NOT EXISTS annotations (
  session_id TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  annotator_id TEXT NOT NULL,
  regions TEXT NOT NULL,
  mask_path TEXT NOT NULL,
  mask_hash TEXT NOT NULL,
  created_at TEXT NOT NULL,
  PRIMARY KEY (session_id, sample_id)
);
CREATE TABLE IF NOT EXISTS served (
  session_id TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  config TEXT NOT NULL,
  PRIMARY KEY (session_id, sample_id, config)
);
CREATE TABLE IF NOT EXISTS ratings (
  session_id TEXT NOT NULL,
  sample_id TEXT NOT NULL,
  config TEXT NOT NULL,
  mos INTEGER NOT NULL,
  created_at TEXT NOT NULL,
  PRIMARY KEY (session_id, sample_id, config)
);
)sql";

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK) {
      throw IoError(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Stmt() { sqlite3_finalize(st_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& s) {
    sqlite3_bind_text(st_, i, s.c_str(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, int v) {
    sqlite3_bind_int(st_, i, v);
    return *this;
  }
  /// True while rows are available.
  bool step() {
    const int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw IoError(std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(st_, col);
    return p == nullptr ? std::string() : reinterpret_cast<const char*>(p);
  }
  int integer(int col) const { return sqlite3_column_int(st_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
};

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

std::string regions_to_text(const std::vector<std::pair<double, double>>& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [a, b] : r) j.push_back({a, b});
  return j.dump();
}

std::vector<std::pair<double, double>> regions_from_text(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : nlohmann::json::parse(s)) out.emplace_back(r.at(0), r.at(1));
  return out;
}

}  // namespace

std::string_view to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::kPending: return "pending";
    case SampleStatus::kAnnotated: return "annotated";
    case SampleStatus::kRefined: return "refined";
    case SampleStatus::kRated: return "rated";
  }
  return "?";
}

SampleStatus parse_sample_status(std::string_view s) {
  for (auto k : {SampleStatus::kPending, SampleStatus::kAnnotated, SampleStatus::kRefined,
                 SampleStatus::kRated}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidArgument("unknown sample status '" + std::string(s) + "'");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Store::Store(const std::filesystem::path& db_path) {
  if (db_path.has_parent_path()) std::filesystem::create_directories(db_path.parent_path());
  if (sqlite3_open(db_path.string().c_str(), &db_) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw IoError("cannot open store " + db_path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw IoError("sqlite: " + msg);
  }
}

Session Store::create_session(const std::string& annotator_id,
                              const std::vector<std::string>& sample_ids,
                              int familiarization_count) {
  if (familiarization_count < 0) throw InvalidArgument("familiarization_count must be >= 0");
  std::vector<std::string> sorted = sample_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("session sample ids must be unique");
  }
  std::lock_guard lock(mutex_);
  Session s;
  s.id = new_session_id();
  s.annotator_id = annotator_id;
  s.familiarization_count = familiarization_count;
  s.created_at = utc_now();
  exec("BEGIN");
  try {
    Stmt(db_, "INSERT INTO sessions VALUES (?, ?, ?, ?)")
        .bind(1, s.id).bind(2, annotator_id).bind(3, familiarization_count).bind(4, s.created_at)
        .run();
    for (std::size_t i = 0; i < sample_ids.size(); ++i) {
      Stmt(db_, "INSERT INTO session_samples VALUES (?, ?, ?, 'pending')")
          .bind(1, s.id).bind(2, static_cast<int>(i)).bind(3, sample_ids[i])
          .run();
      s.samples.push_back({static_cast<int>(i), sample_ids[i], SampleStatus::kPending,
                           static_cast<int>(i) < familiarization_count});
    }
    exec("COMMIT");
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
  return s;
}

std::optional<Session> Store::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  Stmt q(db_, "SELECT annotator_id, familiarization_count, created_at FROM sessions WHERE id = ?");
  q.bind(1, session_id);
  if (!q.step()) return std::nullopt;
  Session s;
  s.id = session_id;
  s.annotator_id = q.text(0);
  s.familiarization_count = q.integer(1);
  s.created_at = q.text(2);
  Stmt rows(db_,
            "SELECT position, sample_id, status FROM session_samples WHERE session_id = ? "
            "ORDER BY position");
  rows.bind(1, session_id);
  while (rows.step()) {
    const int pos = rows.integer(0);
    s.samples.push_back({pos, rows.text(1), parse_sample_status(rows.text(2)),
                         pos < s.familiarization_count});
  }
  return s;
}

void Store::set_status(const std::string& session_id, const std::string& sample_id,
                       SampleStatus status) {
  std::lock_guard lock(mutex_);
  Stmt(db_, "UPDATE session_samples SET status = ? WHERE session_id = ? AND sample_id = ?")
      .bind(1, std::string(to_string(status))).bind(2, session_id).bind(3, sample_id)
      .run();
}

void Store::put_annotation(const StoredAnnotation& a) {
  std::lock_guard lock(mutex_);
  Stmt(db_, "INSERT OR REPLACE INTO annotations VALUES (?, ?, ?, ?, ?, ?, ?)")
      .bind(1, a.session_id).bind(2, a.sample_id).bind(3, a.annotator_id)
      .bind(4, regions_to_text(a.regions)).bind(5, a.mask_path.generic_string())
      .bind(6, a.mask_hash).bind(7, a.created_at)
      .run();
}

std::optional<StoredAnnotation> Store::annotation(const std::string& session_id,
                                                  const std::string& sample_id) const {
  std::lock_guard lock(mutex_);
  Stmt q(db_,
         "SELECT annotator_id, regions, mask_path, mask_hash, created_at FROM annotations "
         "WHERE session_id = ? AND sample_id = ?");
  q.bind(1, session_id).bind(2, sample_id);
  if (!q.step()) return std::nullopt;
  return StoredAnnotation{session_id, sample_id, q.text(0), regions_from_text(q.text(1)),
                          q.text(2), q.text(3), q.text(4)};
}

std::vector<StoredAnnotation> Store::annotations() const {
  std::lock_guard lock(mutex_);
  Stmt q(db_,
         "SELECT session_id, sample_id, annotator_id, regions, mask_path, mask_hash, created_at "
         "FROM annotations ORDER BY session_id, sample_id");
  std::vector<StoredAnnotation> out;
  while (q.step()) {
    out.push_back({q.text(0), q.text(1), q.text(2), regions_from_text(q.text(3)), q.text(4),
                   q.text(5), q.text(6)});
  }
  return out;
}

void Store::mark_served(const std::string& session_id, const std::string& sample_id,
                        const std::string& config) {
  std::lock_guard lock(mutex_);
  Stmt(db_, "INSERT OR IGNORE INTO served VALUES (?, ?, ?)")
      .bind(1, session_id).bind(2, sample_id).bind(3, config)
      .run();
}

bool Store::was_served(const std::string& session_id, const std::string& sample_id,
                       const std::string& config) const {
  std::lock_guard lock(mutex_);
  Stmt q(db_, "SELECT 1 FROM served WHERE session_id = ? AND sample_id = ? AND config = ?");
  q.bind(1, session_id).bind(2, sample_id).bind(3, config);
  return q.step();
}

void Store::put_rating(const Rating& r) {
  if (r.mos < 1 || r.mos > 5) throw InvalidArgument("mos must be in 1..5");
  std::lock_guard lock(mutex_);
  Stmt(db_, "INSERT OR REPLACE INTO ratings VALUES (?, ?, ?, ?, ?)")
      .bind(1, r.session_id).bind(2, r.sample_id).bind(3, r.config).bind(4, r.mos)
      .bind(5, r.created_at.empty() ? utc_now() : r.created_at)
      .run();
}

std::vector<Rating> Store::ratings() const {
  std::lock_guard lock(mutex_);
  Stmt q(db_,
         "SELECT r.session_id, s.annotator_id, r.sample_id, r.config, r.mos, r.created_at, "
         "  p.position < s.familiarization_count "
         "FROM ratings r JOIN sessions s ON s.id = r.session_id "
         "JOIN session_samples p ON p.session_id = r.session_id AND p.sample_id = r.sample_id "
         "ORDER BY r.session_id, p.position, r.config");
  std::vector<Rating> out;
  while (q.step()) {
    Rating r;
    r.session_id = q.text(0);
    r.annotator_id = q.text(1);
    r.sample_id = q.text(2);
    r.config = q.text(3);
    r.mos = q.integer(4);
    r.created_at = q.text(5);
    r.familiarization = q.integer(6) != 0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace htse::service
