// tests/unit/test_service.cpp

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

#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "htse/checkpoint.hpp"
#include "htse/eval_set.hpp"
#include "htse/service/regions.hpp"
#include "htse/service/service.hpp"
#include "htse/service/store.hpp"
#include "htse/wav.hpp"
#include "toy_fixture.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

namespace htse::service {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------- regions

TEST(Regions, SnapsToSamples) {
  const auto r = normalize_regions({{0.25, 0.5}}, 16000, 16000);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].begin, 4000u);
  EXPECT_EQ(r[0].end, 8000u);
  const auto odd = normalize_regions({{0.10001, 0.20001}}, 16000, 16000);
  EXPECT_EQ(odd[0].begin, 1600u);
  EXPECT_EQ(odd[0].end, 3201u);
}

TEST(Regions, MergesOverlappingAndTouching) {
  const auto r = normalize_regions({{0.5, 0.75}, {0.0, 0.25}, {0.25, 0.3}, {0.7, 0.8}}, 16000,
                                   16000);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (SampleRange{0, 4800}));
  EXPECT_EQ(r[1], (SampleRange{8000, 12800}));
  const EditMask m = regions_to_mask({{0.5, 0.75}, {0.0, 0.25}}, 16000, 16000);
  EXPECT_EQ(m.count(), 8000u);
  const auto back = mask_to_regions(m);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back[1].first, 0.5);
  EXPECT_DOUBLE_EQ(back[1].second, 0.75);
}

TEST(Regions, RejectsBadRegions) {
  try {
    normalize_regions({{0.0, 0.1}, {0.9, 1.2}}, 16000, 16000);
    FAIL();
  } catch (const RegionError& e) {
    EXPECT_EQ(e.index, 1u);
  }
  EXPECT_THROW(normalize_regions({{0.3, 0.3}}, 16000, 16000), RegionError);
  EXPECT_THROW(normalize_regions({{-0.1, 0.3}}, 16000, 16000), RegionError);
  EXPECT_TRUE(regions_to_mask({}, 100, 16000) == EditMask(100, 0));
}

// ---------------------------------------------------------------- store

TEST(Store, SessionsAnnotationsAndRatings) {
  test::TempDir dir;
  Store st(dir.path() / "db.sqlite");
  const Session s = st.create_session("ann", {"a", "b", "c"}, 1);
  ASSERT_EQ(s.samples.size(), 3u);
  EXPECT_TRUE(s.samples[0].familiarization);
  EXPECT_FALSE(s.samples[1].familiarization);
  st.set_status(s.id, "b", SampleStatus::kAnnotated);
  EXPECT_EQ(st.session(s.id)->samples[1].status, SampleStatus::kAnnotated);
  EXPECT_FALSE(st.session("nope").has_value());

  StoredAnnotation a{s.id, "b", "ann", {{0.0, 0.5}}, dir.path() / "m.json", "h1", utc_now()};
  st.put_annotation(a);
  a.mask_hash = "h2";
  st.put_annotation(a);
  EXPECT_EQ(st.annotation(s.id, "b")->mask_hash, "h2");
  EXPECT_EQ(st.annotations().size(), 1u);

  EXPECT_FALSE(st.was_served(s.id, "b", "tse"));
  st.mark_served(s.id, "b", "tse");
  EXPECT_TRUE(st.was_served(s.id, "b", "tse"));
  st.put_rating({s.id, "ann", "a", "tse", 3, false, utc_now()});
  st.put_rating({s.id, "ann", "b", "tse", 2, false, utc_now()});
  st.put_rating({s.id, "ann", "b", "tse", 4, false, utc_now()});
  const auto rs = st.ratings();
  ASSERT_EQ(rs.size(), 2u);
  for (const auto& r : rs) {
    EXPECT_EQ(r.familiarization, r.sample_id == "a");
    if (r.sample_id == "b") EXPECT_EQ(r.mos, 4);
  }
}

// ---------------------------------------------------------------- http

TseModelConfig mini_tse() {
  TseModelConfig c = TseModelConfig::toy();
  c.channels = 8;
  c.embedding_dim = 8;
  c.speaker_hidden = 16;
  c.ff_dim = 16;
  return c;
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    env_ = new Env;
    MixConfig mc;
    mc.duration_s = 1.0;
    AudioCache cache;
    materialize_eval_set(env_->corpus.index, cache, mc, 4, 5, env_->dir.path() / "eval");
    RefineModelConfig rc = RefineModelConfig::toy();
    rc.channels = 8;
    rc.ff_dim = 16;
    save_tse(env_->dir.path() / "tse.ckpt", TseNetwork(mini_tse(), 1));
    save_refine(env_->dir.path() / "refine.ckpt", RefineNetwork(rc, mini_tse(), 2));
    std::filesystem::create_directories(env_->dir.path() / "static");
    std::ofstream(env_->dir.path() / "static" / "index.html") << "<html>ui</html>";
  }
  static void TearDownTestSuite() { delete env_; }

  void SetUp() override {
    ServiceConfig c;
    c.port = 0;
    c.eval_set_dir = env_->dir.path() / "eval";
    c.tse_checkpoint = env_->dir.path() / "tse.ckpt";
    c.refine_checkpoint = env_->dir.path() / "refine.ckpt";
    c.data_dir = data_.path();
    c.static_dir = env_->dir.path() / "static";
    c.familiarization_count = 1;
    c.http_threads = 2;
    svc_ = std::make_unique<AnnotationService>(c);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", svc_->start());
  }

  void TearDown() override { svc_->stop(); }

  json post(const std::string& path, const json& body, int expect = 200) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
  json get(const std::string& path, int expect = 200) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
  std::string bytes(const std::string& path) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, 200) << path;
    return r->body;
  }

  struct Env {
    test::TempDir dir;
    test::ToyCorpus corpus{4, 3, 1.5};
  };
  static Env* env_;
  test::TempDir data_;
  std::unique_ptr<AnnotationService> svc_;
  std::unique_ptr<httplib::Client> client_;
};

ServiceTest::Env* ServiceTest::env_ = nullptr;

TEST_F(ServiceTest, HealthAndStaticFiles) {
  const json h = get("/health");
  EXPECT_EQ(h["samples"], 4);
  EXPECT_TRUE(h["tse_loaded"].get<bool>());
  EXPECT_TRUE(svc_->models_loaded());
  EXPECT_EQ(bytes("/index.html"), "<html>ui</html>");
}

TEST_F(ServiceTest, AnnotationLoop) {
  const json s = post("/sessions", {{"annotator_id", "a1"}}, 201);
  const std::string sid = s["session_id"];
  ASSERT_EQ(s["samples"].size(), 4u);

  const json first = get("/sessions/" + sid + "/next");
  EXPECT_TRUE(first["familiarization"].get<bool>());
  const std::string id = first["sample_id"];
  EXPECT_DOUBLE_EQ(first["duration_s"].get<double>(), 1.0);

  // Served TSE audio is the model output encoded as WAV.
  const EvalSet set = load_eval_set(env_->dir.path() / "eval");
  const auto tse = load_tse(env_->dir.path() / "tse.ckpt");
  const auto& item = set.find(id);
  const AudioSignal y =
      tse_forward(*tse, item.sample.mixture, speaker_encode(*tse, item.sample.enrollment)).y_tse;
  const std::string tse_wav = bytes(first["audio"]["tse_output"]);
  EXPECT_EQ(tse_wav, encode_wav(y));
  EXPECT_FALSE(bytes(first["audio"]["mixture"]).empty());

  // Empty annotation: refined output is byte-identical to the TSE output.
  json a = post("/samples/" + id + "/annotation", {{"session_id", sid}, {"regions", json::array()}});
  EXPECT_EQ(a["marked_samples"], 0);
  json r = post("/samples/" + id + "/refine", {{"session_id", sid}});
  EXPECT_FALSE(r["cached"].get<bool>());
  EXPECT_EQ(bytes(r["url"]), tse_wav);

  // Region [0.25, 0.5) marks samples [4000, 8000).
  a = post("/samples/" + id + "/annotation",
           {{"session_id", sid}, {"regions", {{0.25, 0.5}}}});
  EXPECT_EQ(a["marked_samples"], 4000);
  const EditMask m = mask_from_json(a["mask"]);
  EXPECT_EQ(m.values[3999], 0);
  EXPECT_EQ(m.values[4000], 1);
  EXPECT_EQ(m.values[7999], 1);
  EXPECT_EQ(m.values[8000], 0);
  r = post("/samples/" + id + "/refine", {{"session_id", sid}});
  EXPECT_FALSE(r["cached"].get<bool>());
  const std::string refined = bytes(r["url"]);
  EXPECT_NE(refined, tse_wav);
  const AudioSignal out = decode_wav(refined);
  const AudioSignal tse_dec = decode_wav(tse_wav);
  for (std::size_t i : {0u, 3999u, 8000u, 15999u}) EXPECT_EQ(out.samples[i], tse_dec.samples[i]);
  r = post("/samples/" + id + "/refine", {{"session_id", sid}});
  EXPECT_TRUE(r["cached"].get<bool>());
  EXPECT_EQ(bytes(r["url"]), refined);

  const json g = get("/samples/" + id + "/annotation?session=" + sid);
  EXPECT_EQ(g["regions"], json({{0.25, 0.5}}));

  // Ratings.
  post("/samples/" + id + "/rating", {{"session_id", sid}, {"config", "tse"}, {"mos", 6}}, 400);
  post("/samples/" + id + "/rating", {{"session_id", sid}, {"config", "tse"}, {"mos", 2.5}}, 400);
  post("/samples/" + id + "/rating",
       {{"session_id", sid}, {"config", "refine-replace"}, {"mos", 3}}, 409);
  post("/samples/" + id + "/rating", {{"session_id", sid}, {"config", "refine"}, {"mos", 4}});
  post("/samples/" + id + "/rating", {{"session_id", sid}, {"config", "tse"}, {"mos", 3}});

  const json next = get("/sessions/" + sid + "/next");
  EXPECT_NE(next["sample_id"], id);
  EXPECT_FALSE(next["familiarization"].get<bool>());
  const std::string id2 = next["sample_id"];
  bytes(next["audio"]["tse_output"]);
  post("/samples/" + id2 + "/annotation", {{"session_id", sid}, {"regions", {{0.0, 0.1}}}});
  post("/samples/" + id2 + "/rating", {{"session_id", sid}, {"config", "tse"}, {"mos", 5}});

  // Familiarization rows are excluded from both exports.
  const json er = get("/export/ratings");
  ASSERT_EQ(er["rows"].size(), 1u);
  EXPECT_EQ(er["rows"][0]["sample_id"], id2);
  EXPECT_DOUBLE_EQ(er["aggregates"]["tse"]["mean_mos"].get<double>(), 5.0);
  const json ea = get("/export/annotations");
  ASSERT_EQ(ea["rows"].size(), 1u);
  EXPECT_EQ(ea["rows"][0]["sample_id"], id2);

  const json sess = get("/sessions/" + sid);
  EXPECT_EQ(sess["samples"][0]["status"], "rated");
}

TEST_F(ServiceTest, Errors) {
  const std::string sid = post("/sessions", {{"annotator_id", "a2"}}, 201)["session_id"];
  const std::string id = get("/sessions/" + sid + "/next")["sample_id"];
  get("/sessions/nope", 404);
  get("/samples/nope/audio/mixture", 404);
  post("/samples/" + id + "/refine", {{"session_id", sid}}, 409);
  const json bad =
      post("/samples/" + id + "/annotation", {{"session_id", sid}, {"regions", {{0.5, 2.0}}}}, 400);
  EXPECT_EQ(bad["detail"]["index"], 0);
  post("/samples/" + id + "/annotation", {{"session_id", sid}, {"regions", {"x"}}}, 400);
  post("/sessions", {{"annotator_id", "a3"}, {"sample_ids", {"missing"}}}, 404);
  post("/samples/" + id + "/rating", {{"session_id", sid}, {"config", "other"}, {"mos", 3}}, 400);
}

TEST(ServiceNoModel, TseAudioIs503) {
  test::TempDir dir;
  test::ToyCorpus corpus(4, 3, 1.5);
  MixConfig mc;
  mc.duration_s = 1.0;
  AudioCache cache;
  materialize_eval_set(corpus.index, cache, mc, 2, 5, dir.path() / "eval");
  ServiceConfig c;
  c.port = 0;
  c.eval_set_dir = dir.path() / "eval";
  c.data_dir = dir.path() / "data";
  AnnotationService svc(c);
  httplib::Client cli("127.0.0.1", svc.start());
  EXPECT_FALSE(svc.models_loaded());
  const auto s = cli.Post("/sessions", R"({"annotator_id":"x"})", "application/json");
  ASSERT_TRUE(s);
  const std::string sid = json::parse(s->body)["session_id"];
  const std::string id = json::parse(s->body)["samples"][0];
  const auto mix = cli.Get("/samples/" + id + "/audio/mixture?session=" + sid);
  EXPECT_EQ(mix->status, 200);
  const auto t = cli.Get("/samples/" + id + "/audio/tse?session=" + sid);
  EXPECT_EQ(t->status, 503);
  svc.stop();
}

TEST(ServiceConfigTest, JsonAndEnv) {
  ServiceConfig c = service_config_from_json({{"port", 9000}, {"refine_workers", 3}});
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.refine_workers, 3);
  ::setenv("HTSE_PORT", "9100", 1);
  apply_env_overrides(c);
  ::unsetenv("HTSE_PORT");
  EXPECT_EQ(c.port, 9100);
  EXPECT_EQ(service_config_from_json(to_json(c)).port, 9100);
  ServiceConfig empty;
  EXPECT_THROW(AnnotationService{empty}, InvalidArgument);
}

}  // namespace
}  // namespace htse::service
