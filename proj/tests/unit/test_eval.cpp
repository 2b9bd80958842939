// tests/unit/test_eval.cpp

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
#include <mutex>

#include "htse/error.hpp"
#include "htse/eval.hpp"
#include "toy_fixture.hpp"

namespace htse {
namespace {

TseModelConfig mini_tse() {
  TseModelConfig c = TseModelConfig::toy();
  c.channels = 8;
  c.embedding_dim = 8;
  c.speaker_hidden = 16;
  c.ff_dim = 16;
  return c;
}

RefineModelConfig mini_refine() {
  RefineModelConfig c = RefineModelConfig::toy();
  c.channels = 8;
  c.ff_dim = 16;
  return c;
}

class EvalTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new test::ToyCorpus(4, 3, 1.0);
    MixConfig mc;
    mc.duration_s = 0.5;
    mc.snr_lo_db = -5;
    mc.snr_hi_db = 5;
    AudioCache cache;
    items_ = new std::vector<EvalItem>(generate_eval_items(corpus_->index, cache, mc, 6, 11));
    tse_ = new TseNetwork(mini_tse(), 1);
    refine_ = new RefineNetwork(mini_refine(), mini_tse(), 2);
  }
  static void TearDownTestSuite() {
    delete refine_;
    delete tse_;
    delete items_;
    delete corpus_;
  }

  static EvalModels models() { return {tse_, refine_}; }

  static test::ToyCorpus* corpus_;
  static std::vector<EvalItem>* items_;
  static TseNetwork* tse_;
  static RefineNetwork* refine_;
};

test::ToyCorpus* EvalTest::corpus_ = nullptr;
std::vector<EvalItem>* EvalTest::items_ = nullptr;
TseNetwork* EvalTest::tse_ = nullptr;
RefineNetwork* EvalTest::refine_ = nullptr;

TEST(StrategyNames, RoundTrip) {
  for (Strategy s : {Strategy::kTseOnly, Strategy::kRefine, Strategy::kSuccessiveTse,
                     Strategy::kRefineReplace}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("bogus"), InvalidArgument);
  EXPECT_EQ(parse_mask_source("none").kind, MaskSource::Kind::kNone);
  EXPECT_EQ(parse_mask_source("human:/x").dir, "/x");
  EXPECT_EQ(parse_mask_source("dBFS-prob").spec.kind, MaskingKind::kDbfsProb);
}

TEST_F(EvalTest, EmptyMasksReproduceTseExactly) {
  const Strategy s[] = {Strategy::kTseOnly, Strategy::kRefine, Strategy::kSuccessiveTse,
                        Strategy::kRefineReplace};
  const EvalReport r = evaluate_strategies(*items_, models(), MaskSource::none(), s);
  ASSERT_EQ(r.rows.size(), 4 * items_->size());
  const auto tse = r.rows_for("tse-only");
  for (const char* cfg : {"refine", "successive-tse", "refine-replace"}) {
    const auto other = r.rows_for(cfg);
    ASSERT_EQ(other.size(), tse.size());
    for (std::size_t i = 0; i < tse.size(); ++i) {
      ASSERT_TRUE(other[i]->si_sdr.has_value());
      EXPECT_EQ(*other[i]->si_sdr, *tse[i]->si_sdr) << cfg << " " << i;
      EXPECT_FALSE(other[i]->flagged);
    }
  }
  EXPECT_EQ(r.aggregate("refine").flagged, 0u);
  EXPECT_EQ(r.aggregate("refine").mean_si_sdr, r.aggregate("tse-only").mean_si_sdr);
}

TEST_F(EvalTest, FullMaskRefineEqualsRefineReplace) {
  test::TempDir dir;
  std::map<std::string, EditMask> masks;
  for (const auto& it : *items_) masks.emplace(it.id, EditMask(it.sample.mixture.size(), 1));
  save_masks(dir.path(), masks);
  const Strategy s[] = {Strategy::kRefine, Strategy::kRefineReplace};
  const EvalReport r = evaluate_strategies(*items_, models(), MaskSource::human(dir.path()), s);
  const auto a = r.rows_for("refine");
  const auto b = r.rows_for("refine-replace");
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i]->flagged);
    EXPECT_EQ(*a[i]->si_sdr, *b[i]->si_sdr);
  }
}

TEST_F(EvalTest, HumanMaskReplayIsBitExact) {
  test::TempDir dir;
  MaskingFunctionSpec spec = MaskingFunctionSpec::defaults(MaskingKind::kDbfsProb);
  spec.threshold = -30.0;
  const auto masks = compute_masks(*items_, *tse_, MaskSource::function(spec));
  save_masks(dir.path(), masks);
  const EvalReport a = replay_human_masks(dir.path(), *items_, models());
  const EvalReport b = replay_human_masks(dir.path(), *items_, models(), {.threads = 3});
  const EvalReport direct =
      evaluate_config(*items_, models(), MaskSource::function(spec), Strategy::kRefine);
  ASSERT_EQ(a.rows.size(), items_->size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(*a.rows[i].si_sdr, *b.rows[i].si_sdr);
    EXPECT_EQ(*a.rows[i].si_sdr, *direct.rows[i].si_sdr);
    EXPECT_EQ(a.rows[i].marked_samples, masks.at(a.rows[i].id).count());
  }
}

TEST_F(EvalTest, MissingHumanMasksAreListed) {
  test::TempDir dir;
  std::map<std::string, EditMask> some;
  some.emplace((*items_)[0].id, EditMask((*items_)[0].sample.mixture.size(), 0));
  save_masks(dir.path(), some);
  try {
    replay_human_masks(dir.path(), *items_, models());
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_EQ(msg.find((*items_)[0].id), std::string::npos);
    for (std::size_t i = 1; i < items_->size(); ++i) {
      EXPECT_NE(msg.find((*items_)[i].id), std::string::npos);
    }
  }
}

TEST_F(EvalTest, LengthMismatchBecomesErrorRow) {
  test::TempDir dir;
  std::map<std::string, EditMask> masks;
  for (const auto& it : *items_) masks.emplace(it.id, EditMask(it.sample.mixture.size(), 1));
  masks.at((*items_)[2].id) = EditMask(10, 1);
  save_masks(dir.path(), masks);
  const EvalReport r = replay_human_masks(dir.path(), *items_, models());
  EXPECT_FALSE(r.rows[2].error.empty());
  EXPECT_FALSE(r.rows[2].si_sdr.has_value());
  EXPECT_TRUE(r.rows[1].error.empty());
  EXPECT_EQ(r.aggregate("refine").errors, 1u);
  EXPECT_EQ(r.aggregate("refine").count, items_->size() - 1);
}

TEST_F(EvalTest, SuccessiveTseSeesOnlyFirstPassOutput) {
  test::TempDir dir;
  std::map<std::string, EditMask> masks;
  for (std::size_t i = 0; i < items_->size(); ++i) {
    const auto& it = (*items_)[i];
    masks.emplace(it.id, EditMask(it.sample.mixture.size(), i % 2 ? 1 : 0));
  }
  save_masks(dir.path(), masks);
  std::mutex mu;
  std::map<std::string, AudioSignal> seen;
  EvalOptions o;
  o.on_successive_input = [&](const std::string& id, const AudioSignal& x) {
    std::lock_guard lock(mu);
    seen.emplace(id, x);
  };
  evaluate_config(*items_, models(), MaskSource::human(dir.path()), Strategy::kSuccessiveTse, o);
  ASSERT_EQ(seen.size(), items_->size() / 2);
  for (std::size_t i = 1; i < items_->size(); i += 2) {
    const auto& it = (*items_)[i];
    const auto emb = speaker_encode(*tse_, it.sample.enrollment);
    const AudioSignal y = tse_forward(*tse_, it.sample.mixture, emb).y_tse;
    ASSERT_TRUE(seen.count(it.id));
    EXPECT_EQ(seen.at(it.id).samples, y.samples);
  }
}

TEST_F(EvalTest, RefineStrategyNeedsRefineModel) {
  const EvalModels m{tse_, nullptr};
  EXPECT_THROW(evaluate_config(*items_, m, MaskSource::none(), Strategy::kRefine),
               InvalidArgument);
  EXPECT_NO_THROW(evaluate_config(*items_, m, MaskSource::none(), Strategy::kTseOnly));
}

TEST_F(EvalTest, ReportJsonAndCsvRoundTrip) {
  const Strategy s[] = {Strategy::kTseOnly, Strategy::kRefine};
  EvalReport r = evaluate_strategies(*items_, models(), MaskSource::none(), s);
  r.rows[0].pesq = 2.5;
  summarize(r);
  const EvalReport back = report_from_json(to_json(r));
  ASSERT_EQ(back.rows.size(), r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].id, r.rows[i].id);
    EXPECT_EQ(back.rows[i].config, r.rows[i].config);
    EXPECT_EQ(back.rows[i].si_sdr, r.rows[i].si_sdr);
    EXPECT_EQ(back.rows[i].pesq, r.rows[i].pesq);
  }
  EXPECT_EQ(back.aggregate("tse-only").mean_pesq, 2.5);
  const std::string csv = to_csv(r);
  EXPECT_NE(csv.find("pesq"), std::string::npos);
  EXPECT_EQ(csv.find("dnsmos"), std::string::npos);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
            r.rows.size() + 1);
  test::TempDir dir;
  write_report(dir.path() / "report.json", r);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "report.csv"));
  EXPECT_THROW(r.aggregate("nope"), InvalidArgument);
}

}  // namespace
}  // namespace htse
