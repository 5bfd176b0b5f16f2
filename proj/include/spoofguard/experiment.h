// spoofguard/experiment.h

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

// Pipeline stages (features -> optional bottleneck -> classifier -> scores
// -> metrics) and the grid runner built on them. Each grid cell lives in its
// own directory under the output root; a cell whose record.txt exists is
// not run again.

#ifndef SPOOFGUARD_EXPERIMENT_H_
#define SPOOFGUARD_EXPERIMENT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "spoofguard/autoencoder.h"
#include "spoofguard/config.h"
#include "spoofguard/cqcc.h"
#include "spoofguard/dataset.h"
#include "spoofguard/metrics.h"
#include "spoofguard/siamese.h"

namespace spoofguard {

struct DatasetSplit {
  std::vector<Trial> train, dev, eval;
};

/// Speaker-disjoint split. Fractions are of speakers; each subset gets at
/// least one speaker.
DatasetSplit SplitBySpeaker(const std::vector<Trial> &trials, double train_fraction,
                            double dev_fraction, uint64_t seed);

/// From data.train/dev/eval_protocol when set, otherwise data.protocol split
/// by speaker. Audio lives in data.audio_dir or <protocol dir>/wav.
DatasetSplit ResolveDatasets(const Config &config);

/// Points the train/dev/eval protocol and audio keys at an ASVspoof 2019 PA
/// tree (protocols under ASVspoof2019_PA_cm_protocols, audio under
/// ASVspoof2019_PA_{train,dev,eval}/wav). Audio keys already set are kept.
void ApplyDataRoot(Config *config, const std::filesystem::path &root);

// ---------------------------------------------------------------------------

struct FeatureSet {
  std::vector<Trial> trials;
  std::vector<FeatureMatrix> features;

  std::vector<int> Labels() const;
  std::vector<LabeledFeatures> Labeled() const;
};

/// Loads each trial's audio and extracts CQCCs.
FeatureSet ExtractFeatureSet(const std::vector<Trial> &trials, const CqccExtractor &extractor);
/// Keeps the first `dims` cepstral coefficients (identical to extracting
/// with num_coeffs = dims, since the DCT basis rows do not depend on it).
FeatureSet SliceDims(const FeatureSet &set, int dims);
FeatureSet EncodeSet(const AutoencoderModel &model, const FeatureSet &set);
FeatureSet Subset(const FeatureSet &set, const std::vector<size_t> &indices);

struct PipelineSettings {
  CqccConfig cqcc;
  AeHyper ae;
  SiameseHyper classifier;
  int config_id = 3;
  int frames = 400;
  int references = 100;
  double dropout = 0.3;
  int kernel = 3;
  int pool_stride = 2;
  ScoreMode score_mode = ScoreMode::kVote;
  TdcfParams tdcf;
  int folds = 5;

  static PipelineSettings FromConfig(const Config &config);
  SiameseConfig Network(int input_dim) const;
};

/// Per-stage seeds derived from one cell seed.
struct CellSeeds {
  uint64_t ae, init, pairs, dropout, references, bipartition, folds;
  static CellSeeds From(uint64_t seed);
};

SiameseModel TrainSiameseSystem(const FeatureSet &train, const SiameseConfig &network,
                                const SiameseHyper &hyper, const CellSeeds &seeds,
                                int references, TrainReport *report = nullptr);
/// Untrained model with the same normalization and references as a trained
/// one would get.
SiameseModel UntrainedSiameseSystem(const FeatureSet &train, const SiameseConfig &network,
                                    const CellSeeds &seeds, int references);
ScoreSet ScoreSiameseSystem(const SiameseModel &model, const FeatureSet &set, ScoreMode mode);

CnnClassifier TrainCnnSystem(const FeatureSet &train, const SiameseConfig &network,
                             const SiameseHyper &hyper, const CellSeeds &seeds,
                             TrainReport *report = nullptr);
ScoreSet ScoreCnnSystem(const CnnClassifier &model, const FeatureSet &set);

/// Indices of the first ceil(fraction * k) of k seeded folds.
std::vector<size_t> FractionSubset(size_t n, double fraction, int folds, uint64_t seed);

// ---------------------------------------------------------------------------

struct PlanCell {
  int cqcc_dims = 90;
  int bottleneck = 0;  // 0 = no autoencoder
  int config_id = 3;
  double fraction = 1.0;
  uint64_t seed = 1;
  bool cnn = false;

  std::string Name() const;
  std::string SystemLabel() const;  // "3" or "cnn3"
};

struct ExperimentPlan {
  std::vector<int> cqcc_dims{90};
  std::vector<int> bottleneck_dims{70};
  std::vector<int> configs{3};
  std::vector<double> fractions{1.0};
  std::vector<uint64_t> seeds{1};
  bool baseline_cnn = false;
  int workers = 1;

  void Validate() const;
  static ExperimentPlan FromConfig(const Config &config);
  /// Siamese cells in loop order (dims, bottleneck, config, fraction, seed),
  /// followed by baseline cells when enabled.
  std::vector<PlanCell> Cells() const;
};

struct RunRecord {
  PlanCell cell;
  bool ok = false;
  std::string failure;  // reason when !ok
  double dev_eer = 0.0, dev_tdcf = 0.0, eval_eer = 0.0, eval_tdcf = 0.0;
  double wall_s = 0.0;
  bool resumed = false;  // loaded from an earlier run
  std::filesystem::path dir;

  /// "<dims> <bottleneck|none> <config> <fraction> <dev_eer> <dev_tdcf>
  /// <eval_eer> <eval_tdcf> <seed>", EERs in percent.
  std::string SummaryLine() const;
};

void WriteRecord(const RunRecord &record, const std::filesystem::path &path);
RunRecord ReadRecord(const std::filesystem::path &path);

/// Runs one cell into `cell_dir`: scores, models and record.txt.
RunRecord RunCell(const PlanCell &cell, const PipelineSettings &settings,
                  const FeatureSet &train_full,
                  const FeatureSet &dev_full, const FeatureSet &eval_full,
                  const std::filesystem::path &cell_dir);

/// Runs (or resumes) every cell; writes <out_dir>/summary.txt and
/// <out_dir>/config.txt. Training failures are recorded, not thrown.
std::vector<RunRecord> RunPlan(const ExperimentPlan &plan, const Config &config,
                               const std::filesystem::path &out_dir);

RunRecord SingleCnnBaseline(int config_id, const Config &config,
                            const std::filesystem::path &out_dir, uint64_t seed = 1);

}  // namespace spoofguard

#endif  // SPOOFGUARD_EXPERIMENT_H_
