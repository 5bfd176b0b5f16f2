// experiment.cc

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

#include "spoofguard/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

namespace {

std::filesystem::path AudioDirFor(const Config &config, const std::filesystem::path &protocol,
                                  const std::string &subset = "") {
  std::string dir = subset.empty() ? "" : config.Get("data." + subset + "_audio_dir");
  if (dir.empty()) dir = config.Get("data.audio_dir");
  return dir.empty() ? protocol.parent_path() / "wav" : std::filesystem::path(dir);
}

std::string FormatFraction(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", f);
  return buf;
}

std::string Percent(double eer) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * eer);
  return buf;
}

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

DatasetSplit SplitBySpeaker(const std::vector<Trial> &trials, double train_fraction,
                            double dev_fraction, uint64_t seed) {
  Require(train_fraction > 0.0 && dev_fraction > 0.0 && train_fraction + dev_fraction < 1.0,
          ErrorCode::kInvalidArgument, "split fractions must be positive and leave room for eval");
  std::vector<std::string> speakers;
  std::set<std::string> seen;
  for (const auto &t : trials)
    if (seen.insert(t.speaker_id).second) speakers.push_back(t.speaker_id);
  Require(speakers.size() >= 3, ErrorCode::kInvalidArgument,
          "speaker split needs at least 3 speakers");
  Rng rng(seed);
  rng.Shuffle(&speakers);
  const auto s = static_cast<long>(speakers.size());
  long n_train = std::clamp(std::lround(train_fraction * s), 1L, s - 2);
  long n_dev = std::clamp(std::lround(dev_fraction * s), 1L, s - n_train - 1);
  std::map<std::string, int> subset;
  for (long i = 0; i < s; ++i)
    subset[speakers[static_cast<size_t>(i)]] = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);
  DatasetSplit split;
  for (const auto &t : trials) {
    switch (subset[t.speaker_id]) {
      case 0: split.train.push_back(t); break;
      case 1: split.dev.push_back(t); break;
      default: split.eval.push_back(t); break;
    }
  }
  return split;
}

DatasetSplit ResolveDatasets(const Config &config) {
  const std::string train = config.Get("data.train_protocol");
  if (!train.empty()) {
    const std::string dev = config.Get("data.dev_protocol");
    const std::string eval = config.Get("data.eval_protocol");
    Require(!dev.empty() && !eval.empty(), ErrorCode::kInvalidArgument,
            "data.train_protocol needs data.dev_protocol and data.eval_protocol");
    DatasetSplit split;
    split.train = ParseProtocolFile(train, AudioDirFor(config, train, "train"));
    split.dev = ParseProtocolFile(dev, AudioDirFor(config, dev, "dev"));
    split.eval = ParseProtocolFile(eval, AudioDirFor(config, eval, "eval"));
    return split;
  }
  const std::string protocol = config.Get("data.protocol");
  Require(!protocol.empty(), ErrorCode::kMissingFile,
          "no dataset: set data.protocol or data.train_protocol");
  const auto fractions = config.GetRealList("data.split");
  Require(fractions.size() == 3, ErrorCode::kInvalidArgument,
          "data.split needs three fractions (train, dev, eval)");
  return SplitBySpeaker(ParseProtocolFile(protocol, AudioDirFor(config, protocol)),
                        fractions[0], fractions[1], config.GetSeed("data.split_seed"));
}

void ApplyDataRoot(Config *config, const std::filesystem::path &root) {
  const std::filesystem::path proto = root / "ASVspoof2019_PA_cm_protocols";
  config->Set("data.train_protocol", (proto / "ASVspoof2019.PA.cm.train.trn.txt").string());
  config->Set("data.dev_protocol", (proto / "ASVspoof2019.PA.cm.dev.trl.txt").string());
  config->Set("data.eval_protocol", (proto / "ASVspoof2019.PA.cm.eval.trl.txt").string());
  for (const char *subset : {"train", "dev", "eval"}) {
    const std::string key = std::string("data.") + subset + "_audio_dir";
    if (config->Get(key).empty())
      config->Set(key, (root / ("ASVspoof2019_PA_" + std::string(subset)) / "wav").string());
  }
}

// ---------------------------------------------------------------------------

std::vector<int> FeatureSet::Labels() const {
  std::vector<int> out;
  for (const auto &t : trials) out.push_back(t.key == TrialKey::kSpoof ? kSpoof : kBonafide);
  return out;
}

std::vector<LabeledFeatures> FeatureSet::Labeled() const {
  std::vector<LabeledFeatures> out;
  const auto labels = Labels();
  for (size_t i = 0; i < trials.size(); ++i)
    out.push_back({trials[i].utterance_id, features[i], labels[i]});
  return out;
}

FeatureSet ExtractFeatureSet(const std::vector<Trial> &trials, const CqccExtractor &extractor) {
  FeatureSet set;
  set.trials = trials;
  for (const auto &t : trials) {
    Require(!t.audio_path.empty(), ErrorCode::kMissingFile,
            "trial " + t.utterance_id + " has no audio path");
    set.features.push_back(extractor.Extract(LoadWav(t.audio_path)));
  }
  return set;
}

FeatureSet SliceDims(const FeatureSet &set, int dims) {
  FeatureSet out;
  out.trials = set.trials;
  for (const auto &f : set.features) {
    Require(dims >= 1 && dims <= f.dim(), ErrorCode::kInvalidArgument,
            "cannot keep " + std::to_string(dims) + " of " + std::to_string(f.dim()) +
                " coefficients");
    out.features.emplace_back(f.values().leftCols(dims), f.kind());
  }
  return out;
}

FeatureSet EncodeSet(const AutoencoderModel &model, const FeatureSet &set) {
  FeatureSet out;
  out.trials = set.trials;
  for (const auto &f : set.features) out.features.push_back(AeEncode(model, f));
  return out;
}

FeatureSet Subset(const FeatureSet &set, const std::vector<size_t> &indices) {
  FeatureSet out;
  for (size_t i : indices) {
    out.trials.push_back(set.trials.at(i));
    out.features.push_back(set.features.at(i));
  }
  return out;
}

PipelineSettings PipelineSettings::FromConfig(const Config &config) {
  PipelineSettings s;
  s.cqcc = CqccConfigFrom(config);
  s.ae = AeHyperFrom(config);
  s.classifier = SiameseHyperFrom(config);
  s.config_id = static_cast<int>(config.GetInt("siamese.config"));
  s.frames = static_cast<int>(config.GetInt("siamese.frames"));
  s.references = static_cast<int>(config.GetInt("siamese.references"));
  s.dropout = config.GetReal("siamese.dropout");
  s.kernel = static_cast<int>(config.GetInt("siamese.kernel"));
  s.pool_stride = static_cast<int>(config.GetInt("siamese.pool_stride"));
  s.score_mode = ScoreModeFrom(config);
  s.tdcf = TdcfParamsFrom(config);
  s.folds = static_cast<int>(config.GetInt("plan.folds"));
  return s;
}

SiameseConfig PipelineSettings::Network(int input_dim) const {
  SiameseConfig c = SiameseConfig::Paper(config_id, frames, input_dim);
  c.dropout = dropout;
  c.kernel = kernel;
  c.pool_stride = pool_stride;
  c.Validate();
  return c;
}

CellSeeds CellSeeds::From(uint64_t seed) {
  return {DeriveSeed(seed, 1), DeriveSeed(seed, 2), DeriveSeed(seed, 3), DeriveSeed(seed, 4),
          DeriveSeed(seed, 5), DeriveSeed(seed, 6), DeriveSeed(seed, 7)};
}

namespace {

std::vector<Tensor3> Shape(const std::vector<LabeledFeatures> &items, int frames) {
  std::vector<Tensor3> out;
  for (const auto &it : items) out.push_back(ShapeInput(it.features, frames));
  return out;
}

SiameseModel PrepareSiamese(const FeatureSet &train, const SiameseConfig &network,
                            const CellSeeds &seeds, int references) {
  Require(!train.features.empty(), ErrorCode::kInvalidArgument, "empty training set");
  SiameseModel model = Build(network, seeds.init);
  FitInputNormalization(&model, train.features);
  SelectReferences(&model, train.Labeled(), references, seeds.references);
  return model;
}

}  // namespace

SiameseModel UntrainedSiameseSystem(const FeatureSet &train, const SiameseConfig &network,
                                    const CellSeeds &seeds, int references) {
  return PrepareSiamese(train, network, seeds, references);
}

SiameseModel TrainSiameseSystem(const FeatureSet &train, const SiameseConfig &network,
                                const SiameseHyper &hyper, const CellSeeds &seeds,
                                int references, TrainReport *report) {
  SiameseModel model = PrepareSiamese(train, network, seeds, references);
  const auto [idx_a, idx_b] = BalancedBipartition(KeysOf(train.trials), seeds.bipartition);
  const auto part_a = Subset(train, idx_a).Labeled();
  const auto part_b = Subset(train, idx_b).Labeled();
  const PairStream pairs = MakePairs(part_a, part_b, seeds.pairs);
  SiameseHyper h = hyper;
  h.seed = seeds.dropout;
  TrainReport r = TrainSiamese(&model, pairs, Shape(part_a, network.input_frames),
                               Shape(part_b, network.input_frames), h);
  if (report) *report = r;
  return model;
}

ScoreSet ScoreSiameseSystem(const SiameseModel &model, const FeatureSet &set, ScoreMode mode) {
  const ReferenceBank bank(model);
  ScoreSet scores;
  for (size_t i = 0; i < set.trials.size(); ++i) {
    const TrialDecision d =
        bank.Evaluate(ShapeInput(set.features[i], model.config.input_frames));
    scores.Add(set.trials[i].utterance_id, set.trials[i].key, VoteToScore(d.Score(mode)));
  }
  return scores;
}

CnnClassifier TrainCnnSystem(const FeatureSet &train, const SiameseConfig &network,
                             const SiameseHyper &hyper, const CellSeeds &seeds,
                             TrainReport *report) {
  Require(!train.features.empty(), ErrorCode::kInvalidArgument, "empty training set");
  CnnClassifier model = BuildCnn(network, seeds.init);
  FitInputNormalization(&model, train.features);
  SiameseHyper h = hyper;
  h.seed = seeds.dropout;
  TrainReport r = TrainCnn(&model, Shape(train.Labeled(), network.input_frames), train.Labels(), h);
  if (report) *report = r;
  return model;
}

ScoreSet ScoreCnnSystem(const CnnClassifier &model, const FeatureSet &set) {
  ScoreSet scores;
  for (size_t i = 0; i < set.trials.size(); ++i)
    scores.Add(set.trials[i].utterance_id, set.trials[i].key,
               CnnBonafideProbability(model,
                                      ShapeInput(set.features[i], model.config.input_frames)));
  return scores;
}

std::vector<size_t> FractionSubset(size_t n, double fraction, int folds, uint64_t seed) {
  Require(fraction > 0.0 && fraction <= 1.0, ErrorCode::kInvalidArgument,
          "training fraction must lie in (0, 1]");
  const auto parts = FoldIndices(n, folds, seed);
  const auto take = static_cast<size_t>(
      std::clamp(static_cast<int>(std::ceil(fraction * folds - 1e-9)), 1, folds));
  std::vector<size_t> out;
  for (size_t f = 0; f < take; ++f) out.insert(out.end(), parts[f].begin(), parts[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

std::string PlanCell::Name() const {
  return "d" + std::to_string(cqcc_dims) + "_" +
         (bottleneck > 0 ? "ae" + std::to_string(bottleneck) : std::string("none")) + "_" +
         (cnn ? "cnn" : "c") + std::to_string(config_id) + "_f" + FormatFraction(fraction) +
         "_s" + std::to_string(seed);
}

std::string PlanCell::SystemLabel() const {
  return (cnn ? "cnn" : "") + std::to_string(config_id);
}

void ExperimentPlan::Validate() const {
  Require(!cqcc_dims.empty() && !bottleneck_dims.empty() && !configs.empty() &&
              !fractions.empty() && !seeds.empty(),
          ErrorCode::kInvalidArgument, "experiment plan lists must be non-empty");
  for (int d : cqcc_dims)
    Require(d >= 1, ErrorCode::kInvalidArgument, "CQCC dims must be positive");
  for (int c : configs)
    Require(c >= 1 && c <= 3, ErrorCode::kInvalidArgument,
            "unknown Siamese configuration " + std::to_string(c));
  for (double f : fractions)
    Require(f > 0.0 && f <= 1.0, ErrorCode::kInvalidArgument,
            "training fractions must lie in (0, 1]");
  for (int b : bottleneck_dims)
    for (int d : cqcc_dims)
      Require(b >= 0 && (b == 0 || b < d), ErrorCode::kInvalidArgument,
              "bottleneck " + std::to_string(b) + " must be smaller than CQCC dim " +
                  std::to_string(d));
  Require(workers >= 1, ErrorCode::kInvalidArgument, "plan.workers must be >= 1");
}

ExperimentPlan ExperimentPlan::FromConfig(const Config &config) {
  ExperimentPlan p;
  p.cqcc_dims = config.GetIntList("plan.cqcc_dims");
  p.bottleneck_dims = config.GetIntList("plan.bottleneck_dims");
  p.configs = config.GetIntList("plan.configs");
  p.fractions = config.GetRealList("plan.fractions");
  p.seeds.clear();
  for (int s : config.GetIntList("plan.seeds")) {
    Require(s >= 0, ErrorCode::kInvalidArgument, "plan seeds must be non-negative");
    p.seeds.push_back(static_cast<uint64_t>(s));
  }
  p.baseline_cnn = config.GetBool("plan.baseline_cnn");
  p.workers = static_cast<int>(config.GetInt("plan.workers"));
  p.Validate();
  return p;
}

std::vector<PlanCell> ExperimentPlan::Cells() const {
  std::vector<PlanCell> cells;
  for (bool cnn : {false, true}) {
    if (cnn && !baseline_cnn) break;
    for (int d : cqcc_dims)
      for (int b : bottleneck_dims)
        for (int c : configs)
          for (double f : fractions)
            for (uint64_t s : seeds) cells.push_back({d, b, c, f, s, cnn});
  }
  return cells;
}

std::string RunRecord::SummaryLine() const {
  const std::string bn = cell.bottleneck > 0 ? std::to_string(cell.bottleneck) : "none";
  std::string line = std::to_string(cell.cqcc_dims) + " " + bn + " " + cell.SystemLabel() + " " +
                     FormatFraction(cell.fraction) + " ";
  if (ok)
    line += Percent(dev_eer) + " " + Fixed4(dev_tdcf) + " " + Percent(eval_eer) + " " +
            Fixed4(eval_tdcf);
  else
    line += "nan nan nan nan";
  return line + " " + std::to_string(cell.seed);
}

void WriteRecord(const RunRecord &r, const std::filesystem::path &path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  os << "record dims=" << r.cell.cqcc_dims << " bottleneck=" << r.cell.bottleneck
     << " config=" << r.cell.config_id << " cnn=" << (r.cell.cnn ? 1 : 0)
     << " fraction=" << FormatReal(r.cell.fraction, kModelDigits) << " seed=" << r.cell.seed
     << " dev_eer=" << FormatReal(r.dev_eer, kModelDigits)
     << " dev_tdcf=" << FormatReal(r.dev_tdcf, kModelDigits)
     << " eval_eer=" << FormatReal(r.eval_eer, kModelDigits)
     << " eval_tdcf=" << FormatReal(r.eval_tdcf, kModelDigits)
     << " wall_s=" << FormatReal(r.wall_s, 6) << '\n';
}

RunRecord ReadRecord(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  KeyValueLine kv(line, "record");
  RunRecord r;
  r.cell.cqcc_dims = static_cast<int>(kv.GetInt("dims"));
  r.cell.bottleneck = static_cast<int>(kv.GetInt("bottleneck"));
  r.cell.config_id = static_cast<int>(kv.GetInt("config"));
  r.cell.cnn = kv.GetInt("cnn") != 0;
  r.cell.fraction = ParseReal(kv.Get("fraction"));
  r.cell.seed = static_cast<uint64_t>(std::stoull(kv.Get("seed")));
  r.dev_eer = ParseReal(kv.Get("dev_eer"));
  r.dev_tdcf = ParseReal(kv.Get("dev_tdcf"));
  r.eval_eer = ParseReal(kv.Get("eval_eer"));
  r.eval_tdcf = ParseReal(kv.Get("eval_tdcf"));
  r.wall_s = ParseReal(kv.Get("wall_s"));
  r.ok = true;
  r.dir = path.parent_path();
  return r;
}

RunRecord RunCell(const PlanCell &cell, const PipelineSettings &settings,
                  const FeatureSet &train_full,
                  const FeatureSet &dev_full, const FeatureSet &eval_full,
                  const std::filesystem::path &cell_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cell_dir);
  const CellSeeds seeds = CellSeeds::From(cell.seed);

  FeatureSet train = SliceDims(train_full, cell.cqcc_dims);
  FeatureSet dev = SliceDims(dev_full, cell.cqcc_dims);
  FeatureSet eval = SliceDims(eval_full, cell.cqcc_dims);
  if (cell.fraction < 1.0)
    train = Subset(train, FractionSubset(train.trials.size(), cell.fraction, settings.folds,
                                         seeds.folds));

  if (cell.bottleneck > 0) {
    AeHyper ae = settings.ae;
    ae.seed = seeds.ae;
    const AutoencoderModel model = AeTrain(train.features, cell.bottleneck, ae);
    SaveAutoencoder(model, cell_dir / "autoencoder.txt");
    train = EncodeSet(model, train);
    dev = EncodeSet(model, dev);
    eval = EncodeSet(model, eval);
  }

  PipelineSettings local = settings;
  local.config_id = cell.config_id;
  const SiameseConfig network = local.Network(static_cast<int>(train.features.front().dim()));
  ScoreSet dev_scores, eval_scores;
  if (cell.cnn) {
    const CnnClassifier model = TrainCnnSystem(train, network, settings.classifier, seeds);
    dev_scores = ScoreCnnSystem(model, dev);
    eval_scores = ScoreCnnSystem(model, eval);
  } else {
    const SiameseModel model =
        TrainSiameseSystem(train, network, settings.classifier, seeds, settings.references);
    SaveSiamese(model, cell_dir / "siamese.txt");
    dev_scores = ScoreSiameseSystem(model, dev, settings.score_mode);
    eval_scores = ScoreSiameseSystem(model, eval, settings.score_mode);
  }
  WriteScores(dev_scores, cell_dir / "dev_scores.txt");
  WriteScores(eval_scores, cell_dir / "eval_scores.txt");

  RunRecord r;
  r.cell = cell;
  r.ok = true;
  r.dir = cell_dir;
  r.dev_eer = ComputeEer(dev_scores).eer;
  r.dev_tdcf = ComputeMinTdcf(dev_scores, settings.tdcf).min_normalized;
  r.eval_eer = ComputeEer(eval_scores).eer;
  r.eval_tdcf = ComputeMinTdcf(eval_scores, settings.tdcf).min_normalized;
  r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteRecord(r, cell_dir / "record.txt");
  return r;
}

std::vector<RunRecord> RunPlan(const ExperimentPlan &plan, const Config &config,
                               const std::filesystem::path &out_dir) {
  plan.Validate();
  const PipelineSettings settings = PipelineSettings::FromConfig(config);
  std::filesystem::create_directories(out_dir);
  config.WriteSnapshot(out_dir / "config.txt");
  const std::vector<PlanCell> cells = plan.Cells();

  std::vector<RunRecord> records(cells.size());
  std::vector<size_t> pending;
  for (size_t i = 0; i < cells.size(); ++i) {
    const auto record_path = out_dir / cells[i].Name() / "record.txt";
    if (std::filesystem::exists(record_path)) {
      records[i] = ReadRecord(record_path);
      records[i].resumed = true;
    } else {
      pending.push_back(i);
    }
  }

  if (!pending.empty()) {
    const DatasetSplit split = ResolveDatasets(config);
    CqccConfig cqcc = settings.cqcc;
    cqcc.num_coeffs = *std::max_element(plan.cqcc_dims.begin(), plan.cqcc_dims.end());
    const CqccExtractor extractor(cqcc);
    const FeatureSet train = ExtractFeatureSet(split.train, extractor);
    const FeatureSet dev = ExtractFeatureSet(split.dev, extractor);
    const FeatureSet eval = ExtractFeatureSet(split.eval, extractor);

    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (size_t k = next++; k < pending.size(); k = next++) {
        const size_t i = pending[k];
        const auto dir = out_dir / cells[i].Name();
        try {
          records[i] = RunCell(cells[i], settings, train, dev, eval, dir);
        } catch (const Error &e) {
          records[i].cell = cells[i];
          records[i].ok = false;
          records[i].dir = dir;
          records[i].failure = std::string(ErrorCodeName(e.code())) + ": " + e.what();
          std::ofstream(dir / "failure.txt") << records[i].failure << '\n';
        }
      }
    };
    const int n_workers = std::min<int>(plan.workers, static_cast<int>(pending.size()));
    std::vector<std::thread> threads;
    for (int w = 1; w < n_workers; ++w) threads.emplace_back(worker);
    worker();
    for (auto &t : threads) t.join();
  }

  std::ofstream summary(out_dir / "summary.txt");
  if (!summary) Fail(ErrorCode::kIo, "cannot write summary in " + out_dir.string());
  for (const auto &r : records) summary << r.SummaryLine() << '\n';
  std::ofstream failures(out_dir / "failures.txt");
  for (const auto &r : records)
    if (!r.ok) failures << r.cell.Name() << ' ' << r.failure << '\n';
  return records;
}

RunRecord SingleCnnBaseline(int config_id, const Config &config,
                            const std::filesystem::path &out_dir, uint64_t seed) {
  const PipelineSettings settings = PipelineSettings::FromConfig(config);
  const DatasetSplit split = ResolveDatasets(config);
  const CqccExtractor extractor(settings.cqcc);
  PlanCell cell;
  cell.cqcc_dims = settings.cqcc.num_coeffs;
  cell.bottleneck = static_cast<int>(config.GetInt("ae.bottleneck"));
  cell.config_id = config_id;
  cell.seed = seed;
  cell.cnn = true;
  return RunCell(cell, settings, ExtractFeatureSet(split.train, extractor),
                 ExtractFeatureSet(split.dev, extractor),
                 ExtractFeatureSet(split.eval, extractor), out_dir / cell.Name());
}

}  // namespace spoofguard
