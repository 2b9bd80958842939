// core/src/service/service.cpp

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

#include "htse/service/service.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "htse/checkpoint.hpp"
#include "htse/error.hpp"
#include "htse/eval_set.hpp"
#include "htse/service/regions.hpp"
#include "htse/service/store.hpp"
#include "htse/wav.hpp"

// Last: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace htse::service {

ServiceConfig service_config_from_json(const json& j, ServiceConfig c) {
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("eval_set_dir")) c.eval_set_dir = j.at("eval_set_dir").get<std::string>();
  if (j.contains("tse_checkpoint")) c.tse_checkpoint = j.at("tse_checkpoint").get<std::string>();
  if (j.contains("refine_checkpoint")) {
    c.refine_checkpoint = j.at("refine_checkpoint").get<std::string>();
  }
  if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("static_dir")) c.static_dir = j.at("static_dir").get<std::string>();
  c.familiarization_count = j.value("familiarization_count", c.familiarization_count);
  c.refine_workers = j.value("refine_workers", c.refine_workers);
  c.http_threads = j.value("http_threads", c.http_threads);
  return c;
}

void apply_env_overrides(ServiceConfig& c) {
  auto env = [](const char* k) -> std::optional<std::string> {
    const char* v = std::getenv(k);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  auto to_int = [](const std::string& k, const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw InvalidArgument(k + " must be an integer, got '" + v + "'");
    }
  };
  if (auto v = env("HTSE_HOST")) c.host = *v;
  if (auto v = env("HTSE_PORT")) c.port = to_int("HTSE_PORT", *v);
  if (auto v = env("HTSE_EVAL_SET")) c.eval_set_dir = *v;
  if (auto v = env("HTSE_TSE_CKPT")) c.tse_checkpoint = *v;
  if (auto v = env("HTSE_REFINE_CKPT")) c.refine_checkpoint = *v;
  if (auto v = env("HTSE_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("HTSE_STATIC_DIR")) c.static_dir = *v;
  if (auto v = env("HTSE_FAMILIARIZATION")) {
    c.familiarization_count = to_int("HTSE_FAMILIARIZATION", *v);
  }
  if (auto v = env("HTSE_REFINE_WORKERS")) c.refine_workers = to_int("HTSE_REFINE_WORKERS", *v);
}

json to_json(const ServiceConfig& c) {
  return {{"host", c.host},
          {"port", c.port},
          {"eval_set_dir", c.eval_set_dir.generic_string()},
          {"tse_checkpoint", c.tse_checkpoint.generic_string()},
          {"refine_checkpoint", c.refine_checkpoint.generic_string()},
          {"data_dir", c.data_dir.generic_string()},
          {"static_dir", c.static_dir.generic_string()},
          {"familiarization_count", c.familiarization_count},
          {"refine_workers", c.refine_workers},
          {"http_threads", c.http_threads}};
}

namespace {

/// Maps to an HTTP status in the handler wrapper.
struct HttpError {
  int status;
  std::string message;
  json detail = nullptr;
};

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("cannot write " + p.string());
  }
  fs::rename(tmp, p);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError{400, std::string("invalid JSON body: ") + e.what()};
  }
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw HttpError{400, std::string("missing string field '") + key + "'"};
  }
  return j.at(key).get<std::string>();
}

std::string hash_text(std::uint64_t h) { return checksum_hex(h); }

}  // namespace

struct AnnotationService::Impl {
  ServiceConfig cfg;
  EvalSet eval_set;
  std::map<std::string, const EvalItem*> items;
  std::unique_ptr<TseNetwork> tse;
  std::unique_ptr<RefineNetwork> refine;
  std::unique_ptr<Store> store;
  httplib::Server server;
  std::thread thread;
  int bound_port = -1;
  std::counting_semaphore<1024> refine_slots;

  struct TseEntry {
    SpeakerEmbedding emb;
    TseResult result;
    std::string wav;
  };
  std::mutex tse_mutex;
  std::map<std::string, std::shared_ptr<const TseEntry>> tse_cache;
  std::mutex refine_mutex;
  std::map<std::string, std::shared_ptr<const std::pair<std::string, std::string>>> refine_cache;

  explicit Impl(ServiceConfig c)
      : cfg(std::move(c)), refine_slots(std::clamp(cfg.refine_workers, 1, 1024)) {
    if (cfg.eval_set_dir.empty()) throw InvalidArgument("service needs eval_set_dir");
    eval_set = load_eval_set(cfg.eval_set_dir);
    for (const auto& it : eval_set.items) items.emplace(it.id, &it);
    if (!cfg.tse_checkpoint.empty()) tse = load_tse(cfg.tse_checkpoint);
    if (!cfg.refine_checkpoint.empty()) refine = load_refine(cfg.refine_checkpoint);
    if (refine && tse && to_json(refine->tse_config()) != to_json(tse->config())) {
      throw InvalidArgument("refinement checkpoint does not match the TSE config");
    }
    store = std::make_unique<Store>(cfg.data_dir / "annotations.sqlite");
    routes();
  }

  const EvalItem& item(const std::string& id) const {
    const auto it = items.find(id);
    if (it == items.end()) throw HttpError{404, "unknown sample '" + id + "'"};
    return *it->second;
  }

  Session session(const std::string& sid) const {
    auto s = store->session(sid);
    if (!s) throw HttpError{404, "unknown session '" + sid + "'"};
    return *s;
  }

  const SessionSample& member(const Session& s, const std::string& sample_id) const {
    for (const auto& m : s.samples) {
      if (m.sample_id == sample_id) return m;
    }
    throw HttpError{404, "sample '" + sample_id + "' is not part of session " + s.id};
  }

  std::shared_ptr<const TseEntry> tse_for(const std::string& id) {
    if (!tse) throw HttpError{503, "TSE model not loaded"};
    {
      std::lock_guard lock(tse_mutex);
      if (auto it = tse_cache.find(id); it != tse_cache.end()) return it->second;
    }
    const EvalItem& it = item(id);
    auto e = std::make_shared<TseEntry>();
    e->emb = speaker_encode(*tse, it.sample.enrollment);
    e->result = tse_forward(*tse, it.sample.mixture, e->emb);
    e->wav = encode_wav(e->result.y_tse);
    std::lock_guard lock(tse_mutex);
    return tse_cache.emplace(id, std::move(e)).first->second;
  }

  EditMask stored_mask(const std::string& sid, const std::string& sample_id,
                       StoredAnnotation* out = nullptr) {
    auto a = store->annotation(sid, sample_id);
    if (!a) throw HttpError{409, "sample '" + sample_id + "' has no annotation in this session"};
    if (out) *out = *a;
    return load_mask(a->mask_path);
  }

  /// (y_output wav, y_refine wav), cached by sample and mask hash.
  std::shared_ptr<const std::pair<std::string, std::string>> refined(const std::string& id,
                                                                     const EditMask& mask,
                                                                     bool* hit) {
    if (!tse || !refine) throw HttpError{503, "refinement model not loaded"};
    const std::string key = id + "-" + hash_text(mask_hash(mask));
    {
      std::lock_guard lock(refine_mutex);
      if (auto it = refine_cache.find(key); it != refine_cache.end()) {
        *hit = true;
        return it->second;
      }
    }
    const fs::path out_file = cfg.data_dir / "cache" / (key + ".output.wav");
    const fs::path rep_file = cfg.data_dir / "cache" / (key + ".refine.wav");
    std::shared_ptr<std::pair<std::string, std::string>> v;
    if (fs::exists(out_file) && fs::exists(rep_file)) {
      v = std::make_shared<std::pair<std::string, std::string>>(read_file(out_file),
                                                                read_file(rep_file));
      *hit = true;
    } else {
      const auto entry = tse_for(id);
      const EvalItem& it = item(id);
      refine_slots.acquire();
      AudioSignal y_refine;
      try {
        const auto st = adapt_state(*refine, entry->result.mask);
        y_refine = refine_forward(*refine, it.sample.mixture, entry->emb, st, mask);
      } catch (...) {
        refine_slots.release();
        throw;
      }
      refine_slots.release();
      v = std::make_shared<std::pair<std::string, std::string>>(
          encode_wav(compose_output(entry->result.y_tse, y_refine, mask)), encode_wav(y_refine));
      write_file(out_file, v->first);
      write_file(rep_file, v->second);
      *hit = false;
    }
    std::lock_guard lock(refine_mutex);
    return refine_cache.emplace(key, std::move(v)).first->second;
  }

  static std::string audio_url(const std::string& id, const std::string& kind,
                               const std::string& sid, const std::string& mask = {}) {
    std::string u = "/samples/" + id + "/audio/" + kind + "?session=" + sid;
    if (!mask.empty()) u += "&mask=" + mask;
    return u;
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      auto fail = [&](int status, const std::string& msg, const json& detail = nullptr) {
        json body{{"error", msg}};
        if (!detail.is_null()) body["detail"] = detail;
        res.status = status;
        res.set_content(body.dump(), "application/json");
      };
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        fail(e.status, e.message, e.detail);
      } catch (const RegionError& e) {
        fail(400, e.what(), json{{"index", e.index}, {"region", {e.region.first, e.region.second}}});
      } catch (const InvalidArgument& e) {
        fail(400, e.what());
      } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        fail(500, e.what());
      }
    };
  }

  static void reply(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  void routes() {
    server.Get("/health", wrap([this](const httplib::Request&, httplib::Response& res) {
      reply(res, {{"status", "ok"},
                  {"samples", items.size()},
                  {"tse_loaded", tse != nullptr},
                  {"refine_loaded", refine != nullptr}});
    }));

    server.Post("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const std::string annotator = require_string(body, "annotator_id");
      std::vector<std::string> ids;
      if (body.contains("sample_ids")) {
        for (const auto& v : body.at("sample_ids")) {
          ids.push_back(v.get<std::string>());
          item(ids.back());
        }
      } else {
        for (const auto& it : eval_set.items) ids.push_back(it.id);
      }
      const int fam = body.value("familiarization_count", cfg.familiarization_count);
      const Session s = store->create_session(annotator, ids, fam);
      reply(res, {{"session_id", s.id}, {"samples", ids}, {"familiarization_count", fam}}, 201);
    }));

    server.Get(R"(/sessions/([^/]+))",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
      const Session s = session(req.matches[1]);
      json samples = json::array();
      for (const auto& m : s.samples) {
        samples.push_back({{"position", m.position},
                           {"sample_id", m.sample_id},
                           {"status", std::string(to_string(m.status))},
                           {"familiarization", m.familiarization}});
      }
      reply(res, {{"session_id", s.id},
                  {"annotator_id", s.annotator_id},
                  {"familiarization_count", s.familiarization_count},
                  {"samples", samples}});
    }));

    server.Get(R"(/sessions/([^/]+)/next)",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
      const Session s = session(req.matches[1]);
      for (const auto& m : s.samples) {
        if (m.status == SampleStatus::kRated) continue;
        const EvalItem& it = item(m.sample_id);
        reply(res, {{"done", false},
                    {"session_id", s.id},
                    {"sample_id", m.sample_id},
                    {"position", m.position},
                    {"total", s.samples.size()},
                    {"familiarization", m.familiarization},
                    {"status", std::string(to_string(m.status))},
                    {"sample_rate", it.sample.mixture.sample_rate},
                    {"duration_s", it.sample.mixture.duration_s()},
                    {"audio",
                     {{"mixture", audio_url(m.sample_id, "mixture", s.id)},
                      {"enrollment", audio_url(m.sample_id, "enrollment", s.id)},
                      {"tse_output", audio_url(m.sample_id, "tse", s.id)}}}});
        return;
      }
      reply(res, {{"done", true}, {"session_id", s.id}, {"total", s.samples.size()}});
    }));

    server.Get(R"(/samples/([^/]+)/audio/([a-z\-]+))",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const std::string kind = req.matches[2];
      const EvalItem& it = item(id);
      const std::string sid = req.get_param_value("session");
      if (!sid.empty()) member(session(sid), id);
      std::string bytes;
      std::string served_as;
      if (kind == "mixture") {
        bytes = read_file(eval_set.dir / it.mixture_file);
      } else if (kind == "enrollment") {
        bytes = read_file(eval_set.dir / it.enrollment_file);
      } else if (kind == "tse") {
        bytes = tse_for(id)->wav;
        served_as = "tse";
      } else if (kind == "refine" || kind == "refine-replace") {
        if (sid.empty()) throw HttpError{400, "refined audio needs ?session="};
        StoredAnnotation a;
        const EditMask mask = stored_mask(sid, id, &a);
        const std::string want = req.get_param_value("mask");
        if (!want.empty() && want != a.mask_hash) {
          throw HttpError{409, "annotation changed since refinement (mask " + a.mask_hash + ")"};
        }
        bool hit = false;
        const auto v = refined(id, mask, &hit);
        bytes = kind == "refine" ? v->first : v->second;
        served_as = kind;
      } else {
        throw HttpError{404, "unknown audio kind '" + kind + "'"};
      }
      if (!sid.empty() && !served_as.empty()) store->mark_served(sid, id, served_as);
      res.set_content(bytes, "audio/wav");
    }));

    server.Post(R"(/samples/([^/]+)/annotation)",
                wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const EvalItem& it = item(id);
      const json body = parse_body(req);
      const Session s = session(require_string(body, "session_id"));
      member(s, id);
      std::vector<Region> regions;
      if (body.contains("regions")) {
        for (const auto& r : body.at("regions")) {
          if (!r.is_array() || r.size() != 2 || !r.at(0).is_number() || !r.at(1).is_number()) {
            throw HttpError{400, "regions must be [start_s, end_s] pairs"};
          }
          regions.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
        }
      }
      const auto& mix = it.sample.mixture;
      const EditMask mask = regions_to_mask(regions, mix.size(), mix.sample_rate);
      StoredAnnotation a;
      a.session_id = s.id;
      a.sample_id = id;
      a.annotator_id = body.value("annotator_id", s.annotator_id);
      a.regions = mask_to_regions(mask);
      a.mask_path = cfg.data_dir / "masks" / s.id / (id + ".json");
      a.mask_hash = hash_text(mask_hash(mask));
      a.created_at = utc_now();
      fs::create_directories(a.mask_path.parent_path());
      save_mask(a.mask_path, mask);
      store->put_annotation(a);
      store->set_status(s.id, id, SampleStatus::kAnnotated);
      json regs = json::array();
      for (const auto& [x, y] : a.regions) regs.push_back({x, y});
      reply(res, {{"sample_id", id},
                  {"regions", regs},
                  {"mask_hash", a.mask_hash},
                  {"marked_samples", mask.count()},
                  {"mask", mask_to_json(mask)}});
    }));

    server.Get(R"(/samples/([^/]+)/annotation)",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const Session s = session(req.get_param_value("session"));
      member(s, id);
      StoredAnnotation a;
      const EditMask mask = stored_mask(s.id, id, &a);
      json regs = json::array();
      for (const auto& [x, y] : mask_to_regions(mask)) regs.push_back({x, y});
      reply(res, {{"sample_id", id}, {"regions", regs}, {"mask_hash", a.mask_hash},
                  {"mask", mask_to_json(mask)}});
    }));

    server.Post(R"(/samples/([^/]+)/refine)",
                wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      item(id);
      const json body = parse_body(req);
      const Session s = session(require_string(body, "session_id"));
      member(s, id);
      StoredAnnotation a;
      const EditMask mask = stored_mask(s.id, id, &a);
      bool hit = false;
      refined(id, mask, &hit);
      store->set_status(s.id, id, SampleStatus::kRefined);
      reply(res, {{"sample_id", id},
                  {"mask_hash", a.mask_hash},
                  {"cached", hit},
                  {"url", audio_url(id, "refine", s.id, a.mask_hash)},
                  {"replace_url", audio_url(id, "refine-replace", s.id, a.mask_hash)}});
    }));

    server.Post(R"(/samples/([^/]+)/rating)",
                wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      item(id);
      const json body = parse_body(req);
      const Session s = session(require_string(body, "session_id"));
      member(s, id);
      const std::string config = require_string(body, "config");
      if (config != "tse" && config != "refine" && config != "refine-replace") {
        throw HttpError{400, "config must be tse, refine or refine-replace"};
      }
      if (!body.contains("mos") || !body.at("mos").is_number_integer()) {
        throw HttpError{400, "mos must be an integer in 1..5"};
      }
      const int mos = body.at("mos").get<int>();
      if (mos < 1 || mos > 5) throw HttpError{400, "mos must be an integer in 1..5"};
      if (!store->was_served(s.id, id, config)) {
        throw HttpError{409, "audio for '" + config + "' was not served to this session"};
      }
      Rating r;
      r.session_id = s.id;
      r.sample_id = id;
      r.config = config;
      r.mos = mos;
      store->put_rating(r);
      store->set_status(s.id, id, SampleStatus::kRated);
      reply(res, {{"ok", true}, {"sample_id", id}, {"config", config}, {"mos", mos}});
    }));

    server.Get("/export/ratings", wrap([this](const httplib::Request&, httplib::Response& res) {
      json rows = json::array();
      std::map<std::string, std::pair<double, int>> acc;
      for (const auto& r : store->ratings()) {
        if (r.familiarization) continue;
        rows.push_back({{"session_id", r.session_id},
                        {"annotator_id", r.annotator_id},
                        {"sample_id", r.sample_id},
                        {"config", r.config},
                        {"mos", r.mos},
                        {"created_at", r.created_at}});
        acc[r.config].first += r.mos;
        acc[r.config].second += 1;
      }
      json agg = json::object();
      for (const auto& [cfg_name, v] : acc) {
        agg[cfg_name] = {{"mean_mos", v.first / v.second}, {"count", v.second}};
      }
      reply(res, {{"rows", rows}, {"aggregates", agg}});
    }));

    server.Get("/export/annotations",
               wrap([this](const httplib::Request&, httplib::Response& res) {
      json rows = json::array();
      std::map<std::string, Session> sessions;
      for (const auto& a : store->annotations()) {
        auto it = sessions.find(a.session_id);
        if (it == sessions.end()) it = sessions.emplace(a.session_id, session(a.session_id)).first;
        if (member(it->second, a.sample_id).familiarization) continue;
        json regs = json::array();
        for (const auto& [x, y] : a.regions) regs.push_back({x, y});
        rows.push_back({{"session_id", a.session_id},
                        {"annotator_id", a.annotator_id},
                        {"sample_id", a.sample_id},
                        {"regions", regs},
                        {"mask_hash", a.mask_hash},
                        {"mask_path", a.mask_path.generic_string()}});
      }
      reply(res, {{"rows", rows}});
    }));

    if (!cfg.static_dir.empty()) {
      if (!server.set_mount_point("/", cfg.static_dir.string())) {
        throw IoError("static_dir does not exist: " + cfg.static_dir.string());
      }
    }
    const int threads = std::max(1, cfg.http_threads);
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  }

  int bind() {
    if (cfg.port == 0) {
      bound_port = server.bind_to_any_port(cfg.host);
    } else {
      bound_port = server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
    }
    if (bound_port < 0) {
      throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    }
    return bound_port;
  }
};

AnnotationService::AnnotationService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::start() {
  const int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void AnnotationService::run() {
  impl_->bind();
  spdlog::info("annotation service listening on {}:{}", impl_->cfg.host, impl_->bound_port);
  impl_->server.listen_after_bind();
}

void AnnotationService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int AnnotationService::port() const { return impl_->bound_port; }

bool AnnotationService::models_loaded() const { return impl_->tse && impl_->refine; }

}  // namespace htse::service
