// tests/unit/test_cli.cpp

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
#include <sstream>

#include <nlohmann/json.hpp>

#include "htse/cli.hpp"
#include "temp_dir.hpp"

namespace htse::cli {
namespace {

using nlohmann::json;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
  json last() const {
    std::istringstream is(out);
    std::string line, last;
    while (std::getline(is, line)) {
      if (!line.empty()) last = line;
    }
    return json::parse(last);
  }
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "htse");
  args.push_back("--log-level");
  args.push_back("warn");
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(call({"--help"}).code, kExitOk);
  EXPECT_EQ(call({"bogus"}).code, kExitUsage);
  EXPECT_EQ(call({"mask", "synth"}).code, kExitUsage);  // missing required options
  EXPECT_EQ(call({"model", "init", "--kind", "other", "-o", "x"}).code, kExitUsage);
}

TEST(Cli, RuntimeErrorsAreStructured) {
  const Result r = call({"model", "load", "--checkpoint", "/nonexistent/ckpt"});
  EXPECT_EQ(r.code, kExitRuntime);
  const json e = json::parse(r.err.substr(r.err.find('{')));
  EXPECT_TRUE(e.contains("error"));
  EXPECT_TRUE(e.contains("kind"));
  EXPECT_EQ(call({"mix", "toy-corpus"}).code, kExitUsage);  // no --out
}

TEST(Cli, ToyPipeline) {
  test::TempDir dir;
  const auto p = [&](const char* n) { return (dir.path() / n).string(); };

  Result r = call({"mix", "toy-corpus", "--speakers", "4", "--utterances", "3", "--seconds", "1",
                   "--noise-files", "1", "-o", p("corpus")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(p("corpus") + "/resolved_config.json"));

  r = call({"mix", "index", "--corpus", p("corpus")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.last()["speakers"].size(), 4u);

  r = call({"mix", "make-eval", "--corpus", p("corpus"), "--count", "3", "--duration", "0.5",
            "--seed", "4", "-o", p("eval")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.last()["count"], 3);

  // Config file values are defaults; flags override them.
  std::ofstream(p("train.json")) << R"({"train": {"epochs": 1, "mixtures_per_epoch": 4,
      "val_count": 2, "batch_size": 2, "mix": {"duration_s": 0.5},
      "tse_model": {"channels": 8, "embedding_dim": 8, "speaker_hidden": 16}}})";
  r = call({"--config", p("train.json"), "train", "tse", "--corpus", p("corpus"),
            "--mixtures-per-epoch", "2", "-o", p("tse")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string tse_ckpt = r.last()["best_checkpoint"];
  std::ifstream snap(p("tse") + "/resolved_config.json");
  const json resolved = json::parse(snap);
  EXPECT_EQ(resolved.dump().find("\"mixtures_per_epoch\":2") != std::string::npos, true);

  r = call({"model", "load", "--checkpoint", tse_ckpt});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.last()["kind"], "tse");

  r = call({"eval", "run", "--eval-set", p("eval"), "--tse", tse_ckpt, "--strategy",
            "tse-only,successive-tse", "--mask-source", "GlobalSNR", "-o", p("report.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(p("report.csv")));

  r = call({"eval", "subset", "--report", p("report.json"), "--by", "tse-only", "--count", "2",
            "--lo", "-100", "--hi", "100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.last()["ids"].size(), 2u);

  // Refinement without a TSE checkpoint is a usage error.
  r = call({"--config", p("train.json"), "train", "refine", "--corpus", p("corpus"), "-o",
            p("ref")});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(Cli, MaskSynthAndModelInit) {
  test::TempDir dir;
  const auto p = [&](const char* n) { return (dir.path() / n).string(); };
  Result r = call({"model", "init", "--kind", "refine", "--preset", "toy", "--seed", "3", "-o",
                   p("r.ckpt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = call({"model", "export", "--checkpoint", p("r.ckpt"), "-o", p("r.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream f(p("r.json"));
  const json doc = json::parse(f);
  EXPECT_EQ(doc["kind"], "refine");
  EXPECT_FALSE(doc["arrays"].empty());
}

}  // namespace
}  // namespace htse::cli
