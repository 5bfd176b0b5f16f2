// spoofguard/siamese.h

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

// Weight-shared two-leg CNN. Both inputs run through the one LegParams held
// by the model; their embeddings are combined as |a - b|, passed through a
// highway layer and a 2-way softmax whose class-1 probability is the
// dissimilarity score ("different"). A trial is judged against a fixed set
// of bona fide references by majority vote.

#ifndef SPOOFGUARD_SIAMESE_H_
#define SPOOFGUARD_SIAMESE_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spoofguard/base.h"
#include "spoofguard/cqcc.h"
#include "spoofguard/neural.h"

namespace spoofguard {

inline constexpr int kBonafide = 0;
inline constexpr int kSpoof = 1;

/// Configurations 1-3 share filters (160, 200, 100) and pooling width 3;
/// 1: avg pooling, 300 hidden; 2: avg pooling, 500 hidden; 3: max pooling,
/// 300 hidden.
struct SiameseConfig {
  int config_id = 3;
  std::vector<int> conv_filters{160, 200, 100};
  int hidden_nodes = 300;
  PoolKind pooling = PoolKind::kMax;
  int pool_width = 3;
  int pool_stride = 2;
  int kernel = 3;
  int input_frames = 400;
  int input_dim = 70;
  double dropout = 0.3;

  static SiameseConfig Paper(int config_id, int input_frames, int input_dim);
  void Validate() const;
  LegSpec Leg() const;
};

struct HeadParams {
  HighwayParams highway;
  DenseParams output;  // 2 x hidden

  static HeadParams Zeros(int hidden);
  template <class F>
  void ForEachTensor(F &&f) {
    for (auto *m : {&highway.w_h, &highway.w_t, &output.weights})
      f(std::span<double>(m->data(), static_cast<size_t>(m->size())));
    for (auto *v : {&highway.b_h, &highway.b_t, &output.bias})
      f(std::span<double>(v->data(), static_cast<size_t>(v->size())));
  }
};

struct SiameseGrads {
  LegParams leg;
  HeadParams head;
};

class SiameseModel {
 public:
  SiameseConfig config;
  uint64_t seed = 0;
  LegSpec leg_spec;
  LegParams leg;  // the single copy both legs read
  HeadParams head;
  Vector feature_mean;   // per feature dimension
  Vector feature_scale;
  std::vector<std::string> reference_ids;
  std::vector<Tensor3> references;  // shaped, unnormalized

  std::vector<std::span<double>> ParameterSpans();
  SiameseGrads ZeroGrads() const;
  size_t NumParameters() const;
};

/// Centre-crops to `frames` when longer, repeats cyclically when shorter.
Tensor3 ShapeInput(const FeatureMatrix &features, int frames);

SiameseModel Build(const SiameseConfig &config, uint64_t seed);

/// Per-dimension mean / std over every frame of `features`.
void FitInputNormalization(SiameseModel *model, const std::vector<FeatureMatrix> &features);
Tensor3 NormalizeInput(const Vector &mean, const Vector &scale, const Tensor3 &input);

/// Eval-mode embedding of a shaped (unnormalized) input.
Vector Embed(const SiameseModel &model, const Tensor3 &input);
/// Head on two embeddings: softmax probability of "different".
double HeadScore(const SiameseModel &model, const Vector &a, const Vector &b);
double Compare(const SiameseModel &model, const Tensor3 &a, const Tensor3 &b);

/// 1 (spoof) iff score > 0.5.
int Decide(double score);

struct LabeledFeatures {
  std::string id;
  FeatureMatrix features;
  int label;  // kBonafide or kSpoof
};

struct PairIndex {
  size_t a;
  size_t b;
  int target;  // 0 same class, 1 different
};

/// Per epoch, both parts are shuffled (seeded by epoch) and the first
/// min(|A|, |B|) items of each are matched, so each item is drawn at most
/// once. Within the drawn items the spoof-spoof match count is fixed to its
/// expectation under a uniform matching, which keeps the same/different
/// ratio of every epoch at the value implied by the class proportions.
class PairStream {
 public:
  PairStream(std::vector<int> labels_a, std::vector<int> labels_b, uint64_t seed);

  size_t pairs_per_epoch() const { return std::min(labels_a_.size(), labels_b_.size()); }
  std::vector<PairIndex> Epoch(int epoch) const;

 private:
  std::vector<int> labels_a_, labels_b_;
  uint64_t seed_;
};

PairStream MakePairs(const std::vector<LabeledFeatures> &part_a,
                     const std::vector<LabeledFeatures> &part_b, uint64_t seed);

struct SiameseHyper {
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 20;
  int batch_size = 200;
  uint64_t seed = 1;

  void Validate() const;
};

struct TrainReport {
  double initial_loss = 0.0;  // eval-mode loss over the epoch-0 pairs before training
  double final_loss = 0.0;    // same pairs after training
  std::vector<double> epoch_losses;  // running train-mode loss per epoch
  size_t steps = 0;
};

/// Pair loss (binary cross-entropy on the "different" probability). When
/// `grads` is non-null the gradients of both legs accumulate into the one
/// shared leg buffer. Inputs must already be normalized.
double PairLoss(const SiameseModel &model, const Tensor3 &a, const Tensor3 &b,
                int target, Mode mode, Rng *rng, SiameseGrads *grads);

/// Both leg embeddings for a pair, computed exactly as in training.
std::pair<Vector, Vector> PairEmbeddings(const SiameseModel &model, const Tensor3 &a,
                                         const Tensor3 &b);

TrainReport TrainSiamese(SiameseModel *model, const PairStream &pairs,
                         const std::vector<Tensor3> &part_a,
                         const std::vector<Tensor3> &part_b, const SiameseHyper &hyper);

enum class ScoreMode { kVote, kMeanDistance };

struct TrialDecision {
  int label = kBonafide;
  double vote_score = 0.0;     // fraction of references voting "different"
  double mean_distance = 0.0;  // mean dissimilarity over references
  double Score(ScoreMode mode) const {
    return mode == ScoreMode::kVote ? vote_score : mean_distance;
  }
};

/// Reference-by-reference evaluation.
TrialDecision EvaluateTrial(const SiameseModel &model, const Tensor3 &trial,
                            std::span<const Tensor3> references);

/// Caches reference embeddings; Evaluate() gives the same result as
/// EvaluateTrial against the model's stored references.
class ReferenceBank {
 public:
  explicit ReferenceBank(const SiameseModel &model);
  TrialDecision Evaluate(const Tensor3 &trial) const;

 private:
  const SiameseModel &model_;
  std::vector<Vector> embeddings_;
};

/// Stores up to `count` seeded picks of bona fide training items as the
/// model's references. Returns the number stored.
int SelectReferences(SiameseModel *model, const std::vector<LabeledFeatures> &training,
                     int count, uint64_t seed);

void SaveSiamese(const SiameseModel &model, const std::filesystem::path &path);
SiameseModel LoadSiamese(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Single-leg baseline: the same leg followed by a 2-logit softmax over
// {bona fide, spoof}.

struct CnnClassifier {
  SiameseConfig config;
  LegSpec leg_spec;
  LegParams leg;
  DenseParams output;
  Vector feature_mean;
  Vector feature_scale;

  std::vector<std::span<double>> ParameterSpans();
  size_t NumParameters() const;
};

CnnClassifier BuildCnn(const SiameseConfig &config, uint64_t seed);
void FitInputNormalization(CnnClassifier *model, const std::vector<FeatureMatrix> &features);
/// Probability of bona fide.
double CnnBonafideProbability(const CnnClassifier &model, const Tensor3 &input);
TrainReport TrainCnn(CnnClassifier *model, const std::vector<Tensor3> &inputs,
                     const std::vector<int> &labels, const SiameseHyper &hyper);

}  // namespace spoofguard

#endif  // SPOOFGUARD_SIAMESE_H_
