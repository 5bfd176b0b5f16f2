// acceptance.cc

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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero when any gating criterion fails. Criterion 8 runs only when
// SPOOFGUARD_DATA_ROOT is set and never gates.
//
//   acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../gradient_check.h"
#include "../oracles.h"
#include "spoofguard/config.h"
#include "spoofguard/experiment.h"

namespace spoofguard {
namespace {

namespace fs = std::filesystem;

// Tolerances and limits.
constexpr double kLinearityTol = 1e-9;
constexpr double kConstantQTol = 1e-9;
constexpr double kCqtOracleTol = 1e-9;
constexpr double kDctTol = 1e-9;
constexpr double kDspSeconds = 60.0;
constexpr int kGradInstances = 20;
constexpr double kAeGradTol = 1e-4;
constexpr double kNetGradTol = 1e-3;
constexpr double kGradSeconds = 120.0;
constexpr int kMetricSets = 200;
constexpr int kMaxTrials = 1000;
constexpr double kMetricTol = 1e-12;
constexpr double kMetricSeconds = 60.0;
constexpr int kSymmetryPairs = 100;
constexpr double kSymmetryTol = 1e-12;
constexpr double kMaxEer = 0.10;
constexpr double kMaxTdcf = 0.25;
constexpr double kUntrainedLo = 0.40;
constexpr double kUntrainedHi = 0.60;
constexpr double kEndToEndSeconds = 20.0 * 60.0;
constexpr double kFractionSlack = 0.05;
const std::vector<uint64_t> kSeeds{1, 2, 3};

// Desk-scale overrides of the paper-scale defaults; the corpus, feature and
// bottleneck settings stay at their defaults (400 utterances, D = 90, 70).
const std::vector<const char *> kDeskOverrides{
    "siamese.frames=32", "siamese.batch_size=5", "siamese.learning_rate=0.004",
    "siamese.epochs=30"};

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Expect(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void Note(const std::string &what) { detail += (detail.empty() ? "" : "; ") + what; }
};

bool g_all_pass = true;

void Report(int id, const std::string &name, const Outcome &o, double seconds) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << " ("
            << Fmt("%.1f", seconds) << " s): " << o.detail << std::endl;
  g_all_pass = g_all_pass && o.pass;
}

/// Runs `body`; an exception fails the criterion with its message.
Outcome Guard(const std::function<void(Outcome *)> &body) {
  Outcome o;
  try {
    body(&o);
  } catch (const std::exception &e) {
    o.pass = false;
    o.Note(std::string("exception: ") + e.what());
  }
  return o;
}

std::string Slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

// ---------------------------------------------------------------------------

void DspOracles(Outcome *o) {
  const CqtConfig cfg;
  const CqtKernelBank bank(cfg);
  const int fs = cfg.sample_rate_hz;
  const auto &f = bank.center_frequencies();
  const double q = bank.q_factor();

  double q_err = 0.0;
  for (int k = 0; k + 1 < bank.num_bins(); ++k)
    q_err = std::max(q_err, std::abs(f[k] / (f[k + 1] - f[k]) - q));
  o->Expect(q_err <= kConstantQTol, "constant-Q deviation " + Fmt("%.2e", q_err));

  // Every bin: a tone at f_k peaks at bin k in a frame that sees every
  // kernel in full.
  const size_t longest = bank.window_length(0);
  const size_t hop = cfg.hop_length;
  const size_t n = longest + 4 * hop;
  const size_t frame = (longest / 2 + hop) / hop;
  int misplaced = 0;
  double oracle_err = 0.0;
  for (int k = 0; k < bank.num_bins(); ++k) {
    const AudioBuffer tone = Sine(f[k], 0.5, n, fs, 0.7);
    const auto spec = Cqt(tone, bank);
    Eigen::Index arg = -1;
    spec.values.row(static_cast<Eigen::Index>(frame)).cwiseAbs().maxCoeff(&arg);
    misplaced += arg != k;
    if (k % 12 == 0) {
      for (int j = std::max(0, k - 2); j <= std::min(bank.num_bins() - 1, k + 2); ++j)
        oracle_err = std::max(
            oracle_err, std::abs(testing::NaiveCqtBin(tone.samples(), f[j], q, fs, frame * hop) -
                                 spec.values(static_cast<Eigen::Index>(frame), j)));
    }
  }
  o->Expect(misplaced == 0, std::to_string(misplaced) + " bins localized elsewhere");
  o->Expect(oracle_err <= kCqtOracleTol, "naive-correlation mismatch " + Fmt("%.2e", oracle_err));

  Rng rng(5);
  std::vector<double> a(12000), b(12000), mix(12000);
  const double alpha = 0.7, beta = -1.3;
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.Uniform(-0.5, 0.5);
    b[i] = rng.Uniform(-0.5, 0.5);
    mix[i] = alpha * a[i] + beta * b[i];
  }
  const auto sa = Cqt(AudioBuffer(a, fs), bank), sb = Cqt(AudioBuffer(b, fs), bank),
             sm = Cqt(AudioBuffer(mix, fs), bank);
  const double lin = (sm.values - alpha * sa.values - beta * sb.values).cwiseAbs().maxCoeff();
  o->Expect(lin <= kLinearityTol, "linearity residual " + Fmt("%.2e", lin));

  double dct_err = 0.0;
  for (int m : {256, 131}) {
    for (int keep : {90, m}) {
      RowMatrix x(4, m);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Uniform(-20.0, 5.0);
      const FeatureMatrix c = DctRows(x, keep);
      for (Eigen::Index t = 0; t < x.rows(); ++t) {
        const std::vector<double> row(x.row(t).data(), x.row(t).data() + m);
        const auto ref = testing::NaiveDct(row, keep);
        for (int k = 0; k < keep; ++k)
          dct_err = std::max(dct_err, std::abs(c.values()(t, k) - ref[static_cast<size_t>(k)]));
      }
    }
  }
  o->Expect(dct_err <= kDctTol, "DCT mismatch " + Fmt("%.2e", dct_err));
  o->Note(std::to_string(bank.num_bins()) + " bins localized, constant-Q " + Fmt("%.1e", q_err) +
          ", linearity " + Fmt("%.1e", lin) + ", CQT oracle " + Fmt("%.1e", oracle_err) +
          ", DCT " + Fmt("%.1e", dct_err));
}

void GradientSuite(Outcome *o) {
  double ae = 0.0, net = 0.0;
  for (int s = 1; s <= kGradInstances; ++s) {
    ae = std::max(ae, testing::CheckAutoencoderGradient(static_cast<uint64_t>(s)).max_relative_error);
    for (PoolKind pk : {PoolKind::kMax, PoolKind::kAvg})
      net = std::max(net, testing::CheckNetworkGradient(static_cast<uint64_t>(s), pk)
                              .max_relative_error);
  }
  o->Expect(ae < kAeGradTol, "autoencoder error " + Fmt("%.2e", ae));
  o->Expect(net < kNetGradTol, "network error " + Fmt("%.2e", net));
  o->Note(std::to_string(kGradInstances) + " instances each; autoencoder max rel " +
          Fmt("%.1e", ae) + ", network max rel " + Fmt("%.1e", net));
}

void MetricSuite(Outcome *o) {
  Rng rng(99);
  TdcfParams asv;
  asv.p_miss_asv = 0.1;
  asv.p_fa_asv = 0.05;
  asv.p_miss_spoof_asv = 0.4;
  double worst = 0.0;
  for (int k = 0; k < kMetricSets; ++k) {
    const int nb = 1 + static_cast<int>(rng.Below(kMaxTrials / 2));
    const int ns = 1 + static_cast<int>(rng.Below(kMaxTrials / 2));
    const bool ties = k % 2 == 0;
    ScoreSet s;
    std::vector<double> b, sp;
    for (int i = 0; i < nb + ns; ++i) {
      double v = rng.Normal() + (i < nb ? 1.0 : 0.0);
      if (ties) v = std::round(v * 3.0) / 3.0;
      (i < nb ? b : sp).push_back(v);
      s.Add(std::to_string(i), i < nb ? TrialKey::kBonafide : TrialKey::kSpoof, v);
    }
    worst = std::max(worst, std::abs(ComputeEer(s).eer - testing::BruteEer(b, sp)));
    for (const TdcfParams &p : {TdcfParams{}, asv})
      worst = std::max(worst, std::abs(ComputeMinTdcf(s, p).min_normalized -
                                       testing::BruteMinTdcf(b, sp, p.C1(), p.C2())));
  }
  o->Expect(worst <= kMetricTol, "max deviation " + Fmt("%.2e", worst));

  ScoreSet perfect, constant;
  for (int i = 0; i < 10; ++i) {
    perfect.Add("p" + std::to_string(i), i < 5 ? TrialKey::kBonafide : TrialKey::kSpoof,
                i < 5 ? 1.0 + i : -1.0 - i);
    constant.Add("c" + std::to_string(i), i < 5 ? TrialKey::kBonafide : TrialKey::kSpoof, 0.3);
  }
  const double pe = ComputeEer(perfect).eer, pt = ComputeMinTdcf(perfect, {}).min_normalized;
  const double ct = ComputeMinTdcf(constant, {}).min_normalized;
  o->Expect(pe == 0.0 && pt == 0.0, "perfect CM gives EER " + Fmt("%g", pe) + ", t-DCF " +
                                         Fmt("%g", pt));
  o->Expect(ct == 1.0, "constant CM gives t-DCF " + Fmt("%.17g", ct));
  o->Note(std::to_string(kMetricSets) + " sets, max deviation " + Fmt("%.1e", worst) +
          "; perfect CM 0/0, constant CM t-DCF " + Fmt("%g", ct));
}

// ---------------------------------------------------------------------------

struct Pipeline {
  Config config;
  PipelineSettings settings;
  FeatureSet train, dev, eval;
  fs::path work;

  RunRecord Cell(const PlanCell &cell, const std::string &tag) const {
    const RunRecord r = RunCell(cell, settings, train, dev, eval, work / tag / cell.Name());
    std::cout << "  cell " << tag << "/" << cell.Name() << ": dev EER "
              << Fmt("%.4f", r.dev_eer) << ", eval EER " << Fmt("%.4f", r.eval_eer)
              << ", eval t-DCF " << Fmt("%.4f", r.eval_tdcf) << " ("
              << Fmt("%.0f", r.wall_s) << " s)" << std::endl;
    return r;
  }
};

Pipeline BuildPipeline(const fs::path &work) {
  Pipeline p;
  p.work = work;
  for (const char *kv : kDeskOverrides) p.config.Override(kv);
  const fs::path corpus = work / "corpus";
  GenerateSyntheticCorpus(SynthConfigFrom(p.config), corpus);
  p.config.Set("data.protocol", (corpus / "protocol.txt").string());
  p.config.WriteSnapshot(work / "config.txt");
  p.settings = PipelineSettings::FromConfig(p.config);
  const DatasetSplit split = ResolveDatasets(p.config);
  const CqccExtractor extractor(p.settings.cqcc);
  p.train = ExtractFeatureSet(split.train, extractor);
  p.dev = ExtractFeatureSet(split.dev, extractor);
  p.eval = ExtractFeatureSet(split.eval, extractor);
  return p;
}

PlanCell MainCell(uint64_t seed) { return {90, 70, 3, 1.0, seed, false}; }

void EndToEnd(const Pipeline &p, const RunRecord &r, double seconds, Outcome *o) {
  o->Expect(r.ok, "training failed: " + r.failure);
  o->Expect(r.eval_eer <= kMaxEer, "held-out EER " + Fmt("%.4f", r.eval_eer));
  o->Expect(r.eval_tdcf <= kMaxTdcf, "held-out min t-DCF " + Fmt("%.4f", r.eval_tdcf));

  const AutoencoderModel ae = LoadAutoencoder(r.dir / "autoencoder.txt");
  const FeatureSet train = EncodeSet(ae, p.train), eval = EncodeSet(ae, p.eval);
  const SiameseModel untrained =
      UntrainedSiameseSystem(train, p.settings.Network(70), CellSeeds::From(r.cell.seed),
                             p.settings.references);
  const double raw = ComputeEer(ScoreSiameseSystem(untrained, eval, p.settings.score_mode)).eer;
  o->Expect(raw >= kUntrainedLo && raw <= kUntrainedHi, "untrained EER " + Fmt("%.4f", raw));
  o->Expect(seconds < kEndToEndSeconds, "runtime " + Fmt("%.0f", seconds) + " s");
  const KeyCounts total = CountKeys(ParseProtocolFile(p.config.Get("data.protocol")));
  o->Note(std::to_string(total.bonafide + total.spoof) + " utterances (" +
          std::to_string(total.spoof) + " spoof), eval " + std::to_string(p.eval.trials.size()) +
          " trials: EER " + Fmt("%.4f", r.eval_eer) + ", min t-DCF " +
          Fmt("%.4f", r.eval_tdcf) + "; untrained EER " + Fmt("%.4f", raw));
}

void WeightSharing(const Pipeline &p, const RunRecord &r, Outcome *o) {
  const SiameseModel m = LoadSiamese(r.dir / "siamese.txt");
  const AutoencoderModel ae = LoadAutoencoder(r.dir / "autoencoder.txt");
  const FeatureSet eval = EncodeSet(ae, p.eval);
  std::vector<Tensor3> inputs;
  for (const auto &f : eval.features) inputs.push_back(ShapeInput(f, m.config.input_frames));

  int unequal = 0;
  for (const auto &x : inputs) {
    const auto [ea, eb] =
        PairEmbeddings(m, NormalizeInput(m.feature_mean, m.feature_scale, x),
                       NormalizeInput(m.feature_mean, m.feature_scale, x));
    unequal += !(ea.size() == eb.size() &&
                 std::equal(ea.data(), ea.data() + ea.size(), eb.data()));
  }
  o->Expect(unequal == 0, std::to_string(unequal) + " inputs with differing leg embeddings");

  Rng rng(17);
  double asym = 0.0;
  for (int i = 0; i < kSymmetryPairs; ++i) {
    const Tensor3 &a = inputs[rng.Below(inputs.size())];
    const Tensor3 &b = inputs[rng.Below(inputs.size())];
    asym = std::max(asym, std::abs(Compare(m, a, b) - Compare(m, b, a)));
  }
  o->Expect(asym <= kSymmetryTol, "asymmetry " + Fmt("%.2e", asym));
  o->Note(std::to_string(inputs.size()) + " inputs bit-identical across legs; max |c(a,b)-c(b,a)| " +
          Fmt("%.1e", asym) + " over " + std::to_string(kSymmetryPairs) + " pairs");
}

void Determinism(const Pipeline &p, const RunRecord &first, Outcome *o) {
  const RunRecord again = p.Cell(MainCell(1), "repeat");
  for (const char *f : {"dev_scores.txt", "eval_scores.txt", "siamese.txt", "autoencoder.txt"})
    o->Expect(Slurp(first.dir / f) == Slurp(again.dir / f), std::string(f) + " differs");
  auto report = [&](const RunRecord &r, const char *f) {
    return FormatReport(Evaluate("3", ReadScores(r.dir / f), p.settings.tdcf));
  };
  for (const char *f : {"dev_scores.txt", "eval_scores.txt"})
    o->Expect(report(first, f) == report(again, f), std::string("report for ") + f + " differs");
  o->Expect(first.SummaryLine() == again.SummaryLine(), "summary line differs");
  o->Note("score files, models and reports byte-identical; " + report(again, "eval_scores.txt"));
}

void Directional(const Pipeline &p, const RunRecord &main, Outcome *a, Outcome *b, Outcome *c) {
  int ae_wins = 0, siamese_wins = 0, fraction_ok = 0;
  std::string ae_note, cnn_note, frac_note;
  for (uint64_t seed : kSeeds) {
    const RunRecord full = seed == 1 ? main : p.Cell(MainCell(seed), "directional");
    PlanCell none = MainCell(seed);
    none.bottleneck = 0;
    PlanCell cnn = MainCell(seed);
    cnn.cnn = true;
    PlanCell small = MainCell(seed);
    small.fraction = 0.2;
    const RunRecord rn = p.Cell(none, "directional");
    const RunRecord rc = p.Cell(cnn, "directional");
    const RunRecord rs = p.Cell(small, "directional");
    for (const RunRecord *r : {&full, &rn, &rc, &rs})
      if (!r->ok) throw Error(ErrorCode::kNumerical, r->cell.Name() + ": " + r->failure);
    ae_wins += full.eval_eer <= rn.eval_eer;
    siamese_wins += full.eval_eer <= rc.eval_eer;
    fraction_ok += full.eval_eer <= rs.eval_eer + kFractionSlack;
    const std::string s = " s" + std::to_string(seed) + " ";
    ae_note += s + Fmt("%.4f", full.eval_eer) + "/" + Fmt("%.4f", rn.eval_eer);
    cnn_note += s + Fmt("%.4f", full.eval_eer) + "/" + Fmt("%.4f", rc.eval_eer);
    frac_note += s + Fmt("%.4f", full.eval_eer) + "/" + Fmt("%.4f", rs.eval_eer);
  }
  const int n = static_cast<int>(kSeeds.size());
  a->Expect(ae_wins >= 2, "CQCC+AE wins " + std::to_string(ae_wins) + "/" + std::to_string(n));
  a->Note("eval EER CQCC+AE/CQCC:" + ae_note);
  b->Expect(siamese_wins >= 2,
            "Siamese wins " + std::to_string(siamese_wins) + "/" + std::to_string(n));
  b->Note("eval EER Siamese/CNN:" + cnn_note);
  c->Expect(fraction_ok == n, "fraction 1.0 within slack in " + std::to_string(fraction_ok) +
                                  "/" + std::to_string(n) + " seeds");
  c->Note("eval EER fraction 1.0/0.2:" + frac_note);
}

void RealCorpus(const fs::path &root, const fs::path &work) {
  Config config;
  for (const char *kv : kDeskOverrides) config.Override(kv);
  ApplyDataRoot(&config, root);
  const PipelineSettings settings = PipelineSettings::FromConfig(config);
  const DatasetSplit split = ResolveDatasets(config);
  const CqccExtractor extractor(settings.cqcc);
  const RunRecord r =
      RunCell(MainCell(1), settings, ExtractFeatureSet(split.train, extractor),
              ExtractFeatureSet(split.dev, extractor), ExtractFeatureSet(split.eval, extractor),
              work / "real" / MainCell(1).Name());
  std::cout << "  system EER% min-tDCF\n  "
            << FormatReport(Evaluate("3", ReadScores(r.dir / "dev_scores.txt"), settings.tdcf))
            << std::endl;
}

int Main(int argc, char **argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path(SPOOFGUARD_ACCEPTANCE_WORK);
  fs::remove_all(work);
  fs::create_directories(work);

  auto t = Clock::now();
  Outcome o = Guard(DspOracles);
  o.Expect(Since(t) < kDspSeconds, "runtime");
  Report(1, "DSP oracles", o, Since(t));

  t = Clock::now();
  o = Guard(GradientSuite);
  o.Expect(Since(t) < kGradSeconds, "runtime");
  Report(2, "gradients", o, Since(t));

  t = Clock::now();
  o = Guard(MetricSuite);
  o.Expect(Since(t) < kMetricSeconds, "runtime");
  Report(3, "metric oracles", o, Since(t));

  // Criteria 4, 5 and 7 share the end-to-end run.
  t = Clock::now();
  Pipeline pipeline;
  RunRecord main;
  Outcome setup = Guard([&](Outcome *) {
    pipeline = BuildPipeline(work);
    main = pipeline.Cell(MainCell(1), "main");
  });
  const double e2e_seconds = Since(t);
  const bool ready = setup.pass && main.ok;
  auto gated = [&](const std::function<void(Outcome *)> &body) {
    if (ready) return Guard(body);
    Outcome failed = setup;
    failed.Expect(false, "end-to-end run unavailable");
    return failed;
  };

  t = Clock::now();
  Report(4, "weight sharing and symmetry",
         gated([&](Outcome *x) { WeightSharing(pipeline, main, x); }), Since(t));
  t = Clock::now();
  Report(5, "end-to-end synthetic",
         gated([&](Outcome *x) { EndToEnd(pipeline, main, e2e_seconds, x); }),
         e2e_seconds + Since(t));

  t = Clock::now();
  Outcome a, b, c;
  Outcome dir = gated([&](Outcome *) { Directional(pipeline, main, &a, &b, &c); });
  if (!dir.pass) a = b = c = dir;
  const double dir_seconds = Since(t);
  Report(6, "(a) CQCC+AE vs CQCC", a, dir_seconds);
  Report(6, "(b) Siamese vs single CNN", b, dir_seconds);
  Report(6, "(c) training fraction", c, dir_seconds);

  t = Clock::now();
  Report(7, "determinism", gated([&](Outcome *x) { Determinism(pipeline, main, x); }),
         Since(t));

  const char *root = std::getenv("SPOOFGUARD_DATA_ROOT");
  if (root && *root) {
    t = Clock::now();
    try {
      RealCorpus(root, work);
      std::cout << "INFO criterion 8 real corpus (" << Fmt("%.0f", Since(t))
                << " s): report above, not gating" << std::endl;
    } catch (const std::exception &e) {
      std::cout << "INFO criterion 8 real corpus: " << e.what() << " (not gating)" << std::endl;
    }
  } else {
    std::cout << "SKIP criterion 8 real corpus: SPOOFGUARD_DATA_ROOT not set (not gating)"
              << std::endl;
  }

  std::cout << (g_all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << std::endl;
  return g_all_pass ? 0 : 1;
}

}  // namespace
}  // namespace spoofguard

int main(int argc, char **argv) { return spoofguard::Main(argc, argv); }
