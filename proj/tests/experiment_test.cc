// experiment_test.cc

// Copyright 2026  SpoofGuard authors

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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "spoofguard/config.h"
#include "spoofguard/experiment.h"
#include "test_util.h"

namespace spoofguard {
namespace {

using testing::ErrorOf;
using testing::MessageOf;

std::string Slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

/// A corpus and settings small enough for a pipeline run in seconds.
Config TinyConfig(const std::string &name) {
  const auto dir = testing::ScratchDir("tiny_corpus_" + name);
  Config c;
  for (const char *kv :
       {"synth.num_speakers=8", "synth.utterances_per_speaker=6", "synth.duration_s=0.3",
        "cqcc.num_coeffs=40", "ae.epochs=3", "ae.batch_size=32", "siamese.frames=32",
        "siamese.epochs=2", "siamese.batch_size=5", "siamese.learning_rate=0.004",
        "siamese.references=5", "plan.cqcc_dims=40", "plan.bottleneck_dims=30"})
    c.Override(kv);
  GenerateSyntheticCorpus(SynthConfigFrom(c), dir);
  c.Set("data.protocol", (dir / "protocol.txt").string());
  return c;
}

TEST_CASE("config keys and values") {
  Config c;
  CHECK(c.GetInt("siamese.config") == 3);
  CHECK(c.GetInt("siamese.frames") == 400);
  CHECK(c.GetInt("siamese.references") == 100);
  CHECK(c.GetInt("cqcc.num_coeffs") == 90);
  CHECK(c.GetInt("ae.bottleneck") == 70);
  std::istringstream is("# comment\nsiamese.epochs = 7  # trailing\n\nsynth.seed=9\n");
  c.Load(is);
  CHECK(c.GetInt("siamese.epochs") == 7);
  CHECK(c.GetSeed("synth.seed") == 9);

  std::istringstream unknown("siamese.epochs = 7\nsiamese.epoch = 8\n");
  const std::string msg = MessageOf([&] { c.Load(unknown, "run.cfg"); });
  CHECK(msg.find("run.cfg:2") != std::string::npos);
  CHECK(msg.find("siamese.epoch") != std::string::npos);
  std::istringstream no_eq("siamese.epochs 7\n");
  CHECK(ErrorOf([&] { c.Load(no_eq); }) == ErrorCode::kParse);
  CHECK(ErrorOf([&] { c.Override("nope=1"); }) == ErrorCode::kParse);
  CHECK(ErrorOf([&] { c.Override("siamese.epochs"); }) == ErrorCode::kParse);
  c.Set("siamese.epochs", "x");
  CHECK(ErrorOf([&] { c.GetInt("siamese.epochs"); }) == ErrorCode::kParse);
  c.Set("plan.baseline_cnn", "maybe");
  CHECK(ErrorOf([&] { c.GetBool("plan.baseline_cnn"); }) == ErrorCode::kParse);
  c.Set("plan.fractions", "0.2, 1.0");
  CHECK(c.GetRealList("plan.fractions") == std::vector<double>{0.2, 1.0});
}

TEST_CASE("config snapshot reloads to the same values") {
  Config a;
  a.Override("siamese.epochs=3");
  a.Override("data.split=0.6,0.2,0.2");
  Config b;
  std::istringstream is(a.Render());
  b.Load(is);
  CHECK(b.Render() == a.Render());
  CHECK(a.Render().find("siamese.epochs = 3\n") != std::string::npos);
}

TEST_CASE("typed views validate") {
  Config c;
  CHECK(CqccConfigFrom(c).num_coeffs == 90);
  CHECK(SiameseConfigFrom(c, 70).input_dim == 70);
  CHECK(TdcfParamsFrom(c).c_fa_cm == 10.0);
  c.Set("synth.spoof_fraction", "1.5");
  CHECK(ErrorOf([&] { SynthConfigFrom(c); }) == ErrorCode::kInvalidArgument);
  c.Set("siamese.score_mode", "median");
  CHECK(ErrorOf([&] { ScoreModeFrom(c); }).has_value());
}

TEST_CASE("data root fills protocols and keeps explicit audio dirs") {
  Config c;
  c.Set("data.dev_audio_dir", "/elsewhere");
  ApplyDataRoot(&c, "/corpus");
  CHECK(c.Get("data.train_protocol") ==
        "/corpus/ASVspoof2019_PA_cm_protocols/ASVspoof2019.PA.cm.train.trn.txt");
  CHECK(c.Get("data.eval_protocol") ==
        "/corpus/ASVspoof2019_PA_cm_protocols/ASVspoof2019.PA.cm.eval.trl.txt");
  CHECK(c.Get("data.train_audio_dir") == "/corpus/ASVspoof2019_PA_train/wav");
  CHECK(c.Get("data.dev_audio_dir") == "/elsewhere");
}

TEST_CASE("speaker split is disjoint") {
  SynthConfig sc;
  sc.num_speakers = 12;
  sc.utterances_per_speaker = 4;
  std::vector<Trial> trials;
  for (int i = 0; i < sc.NumUtterances(); ++i) {
    Trial t;
    t.speaker_id = SyntheticSpeakerId(i / 4);
    t.utterance_id = SyntheticUtteranceId(i);
    t.key = IsSpoofIndex(sc, i) ? TrialKey::kSpoof : TrialKey::kBonafide;
    trials.push_back(t);
  }
  const DatasetSplit s = SplitBySpeaker(trials, 0.5, 0.25, 3);
  CHECK(s.train.size() + s.dev.size() + s.eval.size() == trials.size());
  auto speakers = [](const std::vector<Trial> &ts) {
    std::set<std::string> out;
    for (const auto &t : ts) out.insert(t.speaker_id);
    return out;
  };
  CHECK(speakers(s.train).size() == 6);
  CHECK(speakers(s.dev).size() == 3);
  CHECK(speakers(s.eval).size() == 3);
  for (const auto &sp : speakers(s.dev)) {
    CHECK(speakers(s.train).count(sp) == 0);
    CHECK(speakers(s.eval).count(sp) == 0);
  }
  CHECK(SplitBySpeaker(trials, 0.5, 0.25, 3).dev == s.dev);
}

TEST_CASE("fraction subsets") {
  CHECK(FractionSubset(100, 1.0, 5, 1).size() == 100);
  CHECK(FractionSubset(100, 0.2, 5, 1).size() == 20);
  CHECK(FractionSubset(100, 0.6, 5, 1).size() == 60);
  CHECK(FractionSubset(101, 0.2, 5, 1).size() == 21);
  const auto small = FractionSubset(100, 0.2, 5, 4), big = FractionSubset(100, 0.4, 5, 4);
  CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  CHECK(ErrorOf([] { FractionSubset(100, 0.0, 5, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(ErrorOf([] { FractionSubset(100, 1.2, 5, 1); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("plan cells") {
  ExperimentPlan p;
  p.cqcc_dims = {30, 90};
  p.bottleneck_dims = {0, 20};
  p.configs = {1, 3};
  p.fractions = {0.2, 1.0};
  p.seeds = {1, 2};
  p.baseline_cnn = true;
  const auto cells = p.Cells();
  CHECK(cells.size() == 64);
  CHECK(cells.front().Name() == "d30_none_c1_f0.20_s1");
  CHECK(cells.back().cnn);
  CHECK(cells.back().SystemLabel() == "cnn3");
  std::set<std::string> names;
  for (const auto &c : cells) names.insert(c.Name());
  CHECK(names.size() == cells.size());

  auto invalid = [&](auto mutate) {
    ExperimentPlan q = p;
    mutate(q);
    return ErrorOf([&] { q.Validate(); });
  };
  CHECK(invalid([](ExperimentPlan &q) { q.fractions = {0.0}; }) == ErrorCode::kInvalidArgument);
  CHECK(invalid([](ExperimentPlan &q) { q.configs = {4}; }) == ErrorCode::kInvalidArgument);
  CHECK(invalid([](ExperimentPlan &q) { q.seeds.clear(); }) == ErrorCode::kInvalidArgument);
  CHECK(invalid([](ExperimentPlan &q) { q.bottleneck_dims = {40}; }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("record file round trip") {
  RunRecord r;
  r.cell = {60, 0, 2, 0.4, 7, true};
  r.ok = true;
  r.dev_eer = 0.0123456789;
  r.dev_tdcf = 0.2454;
  r.eval_eer = 0.5;
  r.eval_tdcf = 1.0;
  r.wall_s = 3.25;
  const auto path = testing::ScratchDir("records") / "record.txt";
  WriteRecord(r, path);
  const RunRecord back = ReadRecord(path);
  CHECK(back.cell.Name() == r.cell.Name());
  CHECK(back.dev_eer == r.dev_eer);
  CHECK(back.eval_tdcf == r.eval_tdcf);
  CHECK(back.SummaryLine() == r.SummaryLine());
  CHECK(r.SummaryLine() == "60 none cnn2 0.40 1.23 0.2454 50.00 1.0000 7");
  RunRecord failed;
  failed.cell = {90, 70, 3, 1.0, 1, false};
  CHECK(failed.SummaryLine() == "90 70 3 1.00 nan nan nan nan 1");
}

TEST_CASE("plan smoke run and resume") {
  const Config config = TinyConfig("plan");
  const auto out = testing::ScratchDir("plan_out");
  const ExperimentPlan plan = ExperimentPlan::FromConfig(config);
  const auto records = RunPlan(plan, config, out);
  REQUIRE(records.size() == 1);
  const RunRecord &r = records[0];
  CAPTURE(r.failure);
  REQUIRE(r.ok);
  CHECK(!r.resumed);
  for (double v : {r.dev_eer, r.eval_eer}) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(std::isfinite(r.dev_tdcf));
  for (const char *f : {"record.txt", "dev_scores.txt", "eval_scores.txt", "siamese.txt",
                        "autoencoder.txt"})
    CHECK(std::filesystem::exists(r.dir / f));
  CHECK(std::filesystem::exists(out / "config.txt"));
  const std::string summary = Slurp(out / "summary.txt");
  CHECK(summary == r.SummaryLine() + "\n");
  const std::string scores = Slurp(r.dir / "dev_scores.txt");

  const auto again = RunPlan(plan, config, out);
  REQUIRE(again.size() == 1);
  CHECK(again[0].resumed);
  CHECK(again[0].SummaryLine() == r.SummaryLine());
  CHECK(Slurp(r.dir / "dev_scores.txt") == scores);

  // Re-running the cell from scratch reproduces its artifacts exactly.
  const auto fresh = testing::ScratchDir("plan_out_fresh");
  const auto rerun = RunPlan(plan, config, fresh);
  CHECK(rerun[0].SummaryLine() == r.SummaryLine());
  CHECK(Slurp(rerun[0].dir / "dev_scores.txt") == scores);
  CHECK(Slurp(rerun[0].dir / "siamese.txt") == Slurp(r.dir / "siamese.txt"));
}

TEST_CASE("a diverging cell is recorded, not fatal") {
  Config config = TinyConfig("diverge");
  config.Set("plan.seeds", "1,2");
  config.Set("plan.bottleneck_dims", "0");
  config.Set("siamese.learning_rate", "1e6");
  const auto out = testing::ScratchDir("plan_diverge");
  const auto records = RunPlan(ExperimentPlan::FromConfig(config), config, out);
  REQUIRE(records.size() == 2);
  for (const auto &r : records) {
    CHECK(!r.ok);
    CHECK(!r.failure.empty());
  }
  const std::string summary = Slurp(out / "summary.txt");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
  CHECK(summary.find("nan nan nan nan") != std::string::npos);
  CHECK(Slurp(out / "failures.txt").find("d40_none_c3_f1.00_s2") != std::string::npos);
}

TEST_CASE("single-CNN baseline cell") {
  Config config = TinyConfig("cnn");
  config.Set("ae.bottleneck", "0");
  config.Set("cqcc.num_coeffs", "40");
  const auto out = testing::ScratchDir("cnn_out");
  const RunRecord r = SingleCnnBaseline(3, config, out, 1);
  CHECK(r.ok);
  CHECK(r.cell.cnn);
  CHECK(r.cell.SystemLabel() == "cnn3");
  CHECK(std::filesystem::exists(r.dir / "dev_scores.txt"));
  CHECK(std::isfinite(r.eval_eer));
}

TEST_CASE("missing dataset") {
  Config config;
  config.Set("data.protocol", "/nonexistent/protocol.txt");
  CHECK(ErrorOf([&] { ResolveDatasets(config); }) == ErrorCode::kMissingFile);
  Config empty;
  CHECK(ErrorOf([&] { ResolveDatasets(empty); }).has_value());
}

}  // namespace
}  // namespace spoofguard
