// siamese.cc

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

#include "spoofguard/siamese.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

namespace {

constexpr uint64_t kDropoutStream = 0xd40;
constexpr uint64_t kHeadStream = 0x4ead;

void InitUniform(RowMatrix *m, Rng *rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
  for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng->Uniform(-r, r);
}

void ScaleSpans(const std::vector<std::span<double>> &spans, double factor) {
  for (auto s : spans)
    for (double &v : s) v *= factor;
}

void ZeroSpans(const std::vector<std::span<double>> &spans) {
  for (auto s : spans) std::fill(s.begin(), s.end(), 0.0);
}

void FitStats(const std::vector<FeatureMatrix> &features, int dim, Vector *mean,
              Vector *scale) {
  Require(!features.empty(), ErrorCode::kInvalidArgument,
          "normalization needs at least one feature matrix");
  Vector sum = Vector::Zero(dim), sq = Vector::Zero(dim);
  double count = 0.0;
  for (const auto &f : features) {
    Require(f.dim() == dim, ErrorCode::kShapeMismatch,
            "feature dim " + std::to_string(f.dim()) + " does not match model input " +
                std::to_string(dim));
    sum += f.values().colwise().sum().transpose();
    count += static_cast<double>(f.num_frames());
  }
  *mean = sum / count;
  for (const auto &f : features)
    sq += (f.values().rowwise() - mean->transpose()).colwise().squaredNorm().transpose();
  *scale = (sq / count).unaryExpr([](double v) { return v > 1e-12 ? std::sqrt(v) : 1.0; });
}

std::string JoinInts(const std::vector<int> &v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> SplitInts(const std::string &s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

void WriteLabeledMatrix(std::ostream &os, const std::string &label, const RowMatrix &m) {
  os << label << '\n';
  WriteMatrixBlock(os, m, kModelDigits);
}

RowMatrix ReadLabeledMatrix(std::istream &is, const std::string &label) {
  ExpectLine(is, label);
  return ReadMatrixBlock(is);
}

void WriteLabeledVector(std::ostream &os, const std::string &label, const Vector &v) {
  os << label << '\n';
  WriteVectorBlock(os, v, kModelDigits);
}

Vector ReadLabeledVector(std::istream &is, const std::string &label) {
  ExpectLine(is, label);
  return ReadVectorBlock(is);
}

template <class T>
void AssignChecked(T *dst, T src, const std::string &what) {
  Require(dst->rows() == src.rows() && dst->cols() == src.cols(), ErrorCode::kParse,
          "block '" + what + "' has the wrong shape");
  *dst = std::move(src);
}

}  // namespace

// ---------------------------------------------------------------------------

SiameseConfig SiameseConfig::Paper(int config_id, int input_frames, int input_dim) {
  SiameseConfig c;
  c.config_id = config_id;
  c.input_frames = input_frames;
  c.input_dim = input_dim;
  switch (config_id) {
    case 1:
      c.pooling = PoolKind::kAvg;
      c.hidden_nodes = 300;
      break;
    case 2:
      c.pooling = PoolKind::kAvg;
      c.hidden_nodes = 500;
      break;
    case 3:
      c.pooling = PoolKind::kMax;
      c.hidden_nodes = 300;
      break;
    default:
      Fail(ErrorCode::kInvalidArgument,
           "unknown Siamese configuration " + std::to_string(config_id));
  }
  return c;
}

void SiameseConfig::Validate() const {
  Require(config_id >= 1 && config_id <= 3, ErrorCode::kInvalidArgument,
          "unknown Siamese configuration " + std::to_string(config_id));
  Leg().Validate();
}

LegSpec SiameseConfig::Leg() const {
  LegSpec s;
  s.input_frames = input_frames;
  s.input_dim = input_dim;
  s.conv_filters = conv_filters;
  s.kernel = kernel;
  s.pool = {pooling, pool_width, pool_stride};
  s.hidden = hidden_nodes;
  s.dropout = dropout;
  return s;
}

HeadParams HeadParams::Zeros(int hidden) {
  return {HighwayParams::Zeros(hidden), DenseParams::Zeros(hidden, 2)};
}

std::vector<std::span<double>> SiameseModel::ParameterSpans() {
  std::vector<std::span<double>> spans;
  CollectSpans(leg, &spans);
  CollectSpans(head, &spans);
  return spans;
}

SiameseGrads SiameseModel::ZeroGrads() const {
  return {LegParams::Zeros(leg_spec), HeadParams::Zeros(leg_spec.hidden)};
}

size_t SiameseModel::NumParameters() const {
  const int h = leg_spec.hidden;
  return leg.NumParameters() + static_cast<size_t>(2 * h * h + 2 * h + 2 * h + 2);
}

// ---------------------------------------------------------------------------

Tensor3 ShapeInput(const FeatureMatrix &features, int frames) {
  Require(frames > 0, ErrorCode::kInvalidArgument, "target frame count must be positive");
  const auto n = static_cast<int>(features.num_frames());
  const auto dim = static_cast<int>(features.dim());
  Tensor3 out(1, frames, dim);
  const int offset = n > frames ? (n - frames) / 2 : 0;
  for (int t = 0; t < frames; ++t) {
    const int src = n > frames ? offset + t : t % n;
    for (int d = 0; d < dim; ++d) out.at(0, t, d) = features.values()(src, d);
  }
  return out;
}

SiameseModel Build(const SiameseConfig &config, uint64_t seed) {
  config.Validate();
  SiameseModel m;
  m.config = config;
  m.seed = seed;
  m.leg_spec = config.Leg();
  Rng rng(seed);
  m.leg = LegParams::Init(m.leg_spec, &rng);
  Rng head_rng(DeriveSeed(seed, kHeadStream));
  m.head = HeadParams::Zeros(config.hidden_nodes);
  InitUniform(&m.head.highway.w_h, &head_rng);
  InitUniform(&m.head.highway.w_t, &head_rng);
  // Start with the gate mostly closed (carry behaviour).
  m.head.highway.b_t.setConstant(-1.0);
  InitUniform(&m.head.output.weights, &head_rng);
  m.feature_mean = Vector::Zero(config.input_dim);
  m.feature_scale = Vector::Ones(config.input_dim);
  return m;
}

void FitInputNormalization(SiameseModel *model, const std::vector<FeatureMatrix> &features) {
  FitStats(features, model->config.input_dim, &model->feature_mean, &model->feature_scale);
}

Tensor3 NormalizeInput(const Vector &mean, const Vector &scale, const Tensor3 &input) {
  Require(input.width() == mean.size(), ErrorCode::kShapeMismatch,
          "input width does not match normalization statistics");
  Tensor3 out = input;
  for (int c = 0; c < out.channels(); ++c)
    for (int t = 0; t < out.height(); ++t)
      for (int d = 0; d < out.width(); ++d)
        out.at(c, t, d) = (out.at(c, t, d) - mean[d]) / scale[d];
  return out;
}

Vector Embed(const SiameseModel &model, const Tensor3 &input) {
  return LegForward(model.leg_spec, model.leg,
                    NormalizeInput(model.feature_mean, model.feature_scale, input),
                    Mode::kEval, nullptr, nullptr);
}

double HeadScore(const SiameseModel &model, const Vector &a, const Vector &b) {
  Require(a.size() == b.size(), ErrorCode::kShapeMismatch, "embedding sizes differ");
  const Vector combined = (a - b).cwiseAbs();
  const Vector y = HighwayForward(model.head.highway, combined);
  return Softmax(DenseForward(model.head.output, y))[1];
}

double Compare(const SiameseModel &model, const Tensor3 &a, const Tensor3 &b) {
  Require(a.SameShape(b), ErrorCode::kShapeMismatch, "compare: input shapes differ");
  return HeadScore(model, Embed(model, a), Embed(model, b));
}

int Decide(double score) { return score > 0.5 ? kSpoof : kBonafide; }

// ---------------------------------------------------------------------------

PairStream::PairStream(std::vector<int> labels_a, std::vector<int> labels_b, uint64_t seed)
    : labels_a_(std::move(labels_a)), labels_b_(std::move(labels_b)), seed_(seed) {
  for (const auto *labels : {&labels_a_, &labels_b_}) {
    Require(!labels->empty(), ErrorCode::kInvalidArgument, "pair part is empty");
    const bool has_bona = std::count(labels->begin(), labels->end(), kBonafide) > 0;
    const bool has_spoof = std::count(labels->begin(), labels->end(), kSpoof) > 0;
    Require(has_bona && has_spoof, ErrorCode::kInvalidArgument,
            "each pair part must contain both classes");
  }
}

std::vector<PairIndex> PairStream::Epoch(int epoch) const {
  Rng rng(DeriveSeed(seed_, static_cast<uint64_t>(epoch)));
  std::vector<size_t> ia(labels_a_.size()), ib(labels_b_.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  rng.Shuffle(&ia);
  rng.Shuffle(&ib);
  const size_t n = pairs_per_epoch();
  std::vector<size_t> a_spoof, a_bona, b_spoof, b_bona;
  for (size_t i = 0; i < n; ++i) {
    (labels_a_[ia[i]] == kSpoof ? a_spoof : a_bona).push_back(ia[i]);
    (labels_b_[ib[i]] == kSpoof ? b_spoof : b_bona).push_back(ib[i]);
  }
  // Spoof-spoof matches fixed at their expected count under a uniform
  // matching, so every epoch has the expected same/different balance.
  const long lo = std::max<long>(0, static_cast<long>(a_spoof.size() + b_spoof.size()) -
                                        static_cast<long>(n));
  const long hi = static_cast<long>(std::min(a_spoof.size(), b_spoof.size()));
  const auto m = static_cast<size_t>(std::clamp<long>(
      std::lround(static_cast<double>(a_spoof.size() * b_spoof.size()) / static_cast<double>(n)),
      lo, hi));

  std::vector<PairIndex> pairs;
  pairs.reserve(n);
  size_t next_b_spoof = 0, next_b_bona = 0;
  for (size_t i = 0; i < a_spoof.size(); ++i) {
    if (i < m)
      pairs.push_back({a_spoof[i], b_spoof[next_b_spoof++], 0});
    else
      pairs.push_back({a_spoof[i], b_bona[next_b_bona++], 1});
  }
  for (size_t i = 0; i < a_bona.size(); ++i) {
    if (next_b_spoof < b_spoof.size())
      pairs.push_back({a_bona[i], b_spoof[next_b_spoof++], 1});
    else
      pairs.push_back({a_bona[i], b_bona[next_b_bona++], 0});
  }
  rng.Shuffle(&pairs);
  return pairs;
}

PairStream MakePairs(const std::vector<LabeledFeatures> &part_a,
                     const std::vector<LabeledFeatures> &part_b, uint64_t seed) {
  auto labels = [](const std::vector<LabeledFeatures> &part) {
    std::vector<int> out;
    for (const auto &item : part) out.push_back(item.label);
    return out;
  };
  return PairStream(labels(part_a), labels(part_b), seed);
}

void SiameseHyper::Validate() const {
  Require(learning_rate > 0.0, ErrorCode::kInvalidArgument, "learning rate must be > 0");
  Require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kInvalidArgument,
          "momentum must lie in [0, 1)");
  Require(epochs >= 1 && batch_size >= 1, ErrorCode::kInvalidArgument,
          "epochs and batch size must be >= 1");
}

// ---------------------------------------------------------------------------

double PairLoss(const SiameseModel &model, const Tensor3 &a, const Tensor3 &b,
                int target, Mode mode, Rng *rng, SiameseGrads *grads) {
  LegCache cache_a, cache_b;
  // Both legs replay the same generator state, so a pair shares one dropout
  // mask and |a - b| stays zero for equal inputs.
  std::optional<Rng> replay;
  if (rng) replay.emplace(*rng);
  const Vector ea = LegForward(model.leg_spec, model.leg, a, mode, rng, grads ? &cache_a : nullptr);
  const Vector eb = LegForward(model.leg_spec, model.leg, b, mode, replay ? &*replay : nullptr,
                               grads ? &cache_b : nullptr);
  const Vector diff = ea - eb;
  HighwayCache hc;
  const Vector y = HighwayForward(model.head.highway, diff.cwiseAbs(), &hc);
  const Vector p = Softmax(DenseForward(model.head.output, y));
  const double p_diff = p[1];
  const double loss = CrossEntropy(std::span<const double>(&p_diff, 1),
                                   std::span<const int>(&target, 1));
  if (grads) {
    const Vector dz = SoftmaxCrossEntropyGrad(p_diff, target);
    const Vector dy = DenseBackward(model.head.output, y, dz, &grads->head.output);
    const Vector dc = HighwayBackward(model.head.highway, hc, dy, &grads->head.highway);
    const Vector d_ea = dc.cwiseProduct(diff.unaryExpr([](double v) {
      return static_cast<double>((v > 0.0) - (v < 0.0));
    }));
    LegBackward(model.leg_spec, model.leg, cache_a, d_ea, &grads->leg);
    LegBackward(model.leg_spec, model.leg, cache_b, -d_ea, &grads->leg);
  }
  return loss;
}

std::pair<Vector, Vector> PairEmbeddings(const SiameseModel &model, const Tensor3 &a,
                                         const Tensor3 &b) {
  LegCache cache_a, cache_b;
  Vector ea = LegForward(model.leg_spec, model.leg, a, Mode::kEval, nullptr, &cache_a);
  Vector eb = LegForward(model.leg_spec, model.leg, b, Mode::kEval, nullptr, &cache_b);
  return {std::move(ea), std::move(eb)};
}

TrainReport TrainSiamese(SiameseModel *model, const PairStream &pairs,
                         const std::vector<Tensor3> &part_a,
                         const std::vector<Tensor3> &part_b, const SiameseHyper &hyper) {
  hyper.Validate();
  Require(pairs.pairs_per_epoch() >= 1, ErrorCode::kInvalidArgument,
          "pair stream yields no pairs");
  std::vector<Tensor3> norm_a, norm_b;
  for (const auto &t : part_a)
    norm_a.push_back(NormalizeInput(model->feature_mean, model->feature_scale, t));
  for (const auto &t : part_b)
    norm_b.push_back(NormalizeInput(model->feature_mean, model->feature_scale, t));

  auto eval_loss = [&](const std::vector<PairIndex> &list) {
    double total = 0.0;
    for (const auto &p : list)
      total += PairLoss(*model, norm_a.at(p.a), norm_b.at(p.b), p.target, Mode::kEval,
                        nullptr, nullptr);
    return total / static_cast<double>(list.size());
  };

  TrainReport report;
  const std::vector<PairIndex> reference_pairs = pairs.Epoch(0);
  report.initial_loss = eval_loss(reference_pairs);

  Rng rng(DeriveSeed(hyper.seed, kDropoutStream));
  SgdOptimizer optimizer(hyper.learning_rate, hyper.momentum);
  const auto params = model->ParameterSpans();
  SiameseGrads grads = model->ZeroGrads();
  std::vector<std::span<double>> grad_spans;
  CollectSpans(grads.leg, &grad_spans);
  CollectSpans(grads.head, &grad_spans);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const std::vector<PairIndex> list = pairs.Epoch(epoch);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < list.size(); start += static_cast<size_t>(hyper.batch_size)) {
      const size_t end = std::min(list.size(), start + static_cast<size_t>(hyper.batch_size));
      ZeroSpans(grad_spans);
      for (size_t i = start; i < end; ++i) {
        const auto &p = list[i];
        epoch_loss += PairLoss(*model, norm_a.at(p.a), norm_b.at(p.b), p.target, Mode::kTrain,
                               &rng, &grads);
      }
      ScaleSpans(grad_spans, 1.0 / static_cast<double>(end - start));
      optimizer.Step(params, grad_spans);
      ++report.steps;
    }
    epoch_loss /= static_cast<double>(list.size());
    Require(std::isfinite(epoch_loss), ErrorCode::kNumerical,
            "Siamese training diverged at epoch " + std::to_string(epoch + 1));
    report.epoch_losses.push_back(epoch_loss);
  }
  report.final_loss = eval_loss(reference_pairs);
  return report;
}

// ---------------------------------------------------------------------------

TrialDecision EvaluateTrial(const SiameseModel &model, const Tensor3 &trial,
                            std::span<const Tensor3> references) {
  Require(!references.empty(), ErrorCode::kInvalidArgument, "no bona fide references");
  int votes = 0;
  double sum = 0.0;
  for (const auto &ref : references) {
    const double d = Compare(model, trial, ref);
    votes += Decide(d);
    sum += d;
  }
  TrialDecision out;
  out.vote_score = static_cast<double>(votes) / static_cast<double>(references.size());
  out.mean_distance = sum / static_cast<double>(references.size());
  out.label = out.vote_score > 0.5 ? kSpoof : kBonafide;
  return out;
}

ReferenceBank::ReferenceBank(const SiameseModel &model) : model_(model) {
  Require(!model.references.empty(), ErrorCode::kInvalidArgument,
          "model has no bona fide references");
  for (const auto &ref : model.references) embeddings_.push_back(Embed(model, ref));
}

TrialDecision ReferenceBank::Evaluate(const Tensor3 &trial) const {
  const Vector e = Embed(model_, trial);
  int votes = 0;
  double sum = 0.0;
  for (const auto &r : embeddings_) {
    const double d = HeadScore(model_, e, r);
    votes += Decide(d);
    sum += d;
  }
  TrialDecision out;
  out.vote_score = static_cast<double>(votes) / static_cast<double>(embeddings_.size());
  out.mean_distance = sum / static_cast<double>(embeddings_.size());
  out.label = out.vote_score > 0.5 ? kSpoof : kBonafide;
  return out;
}

int SelectReferences(SiameseModel *model, const std::vector<LabeledFeatures> &training,
                     int count, uint64_t seed) {
  Require(count >= 1, ErrorCode::kInvalidArgument, "reference count must be >= 1");
  std::vector<size_t> bona;
  for (size_t i = 0; i < training.size(); ++i)
    if (training[i].label == kBonafide) bona.push_back(i);
  Require(!bona.empty(), ErrorCode::kInvalidArgument,
          "no bona fide training items to use as references");
  Rng rng(seed);
  rng.Shuffle(&bona);
  bona.resize(std::min(bona.size(), static_cast<size_t>(count)));
  model->reference_ids.clear();
  model->references.clear();
  for (size_t i : bona) {
    model->reference_ids.push_back(training[i].id);
    model->references.push_back(ShapeInput(training[i].features, model->config.input_frames));
  }
  return static_cast<int>(bona.size());
}

// ---------------------------------------------------------------------------

void SaveSiamese(const SiameseModel &m, const std::filesystem::path &path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  const SiameseConfig &c = m.config;
  os << "siamese config=" << c.config_id << " T=" << c.input_frames << " dim=" << c.input_dim
     << " R=" << m.references.size() << '\n';
  os << "leg filters=" << JoinInts(c.conv_filters) << " kernel=" << c.kernel
     << " pool=" << PoolKindName(c.pooling) << " width=" << c.pool_width
     << " stride=" << c.pool_stride << " hidden=" << c.hidden_nodes
     << " dropout=" << FormatReal(c.dropout, kModelDigits) << " seed=" << m.seed << '\n';
  WriteLabeledVector(os, "mean", m.feature_mean);
  WriteLabeledVector(os, "scale", m.feature_scale);
  for (size_t b = 0; b < m.leg.convs.size(); ++b) {
    WriteLabeledMatrix(os, "conv" + std::to_string(b) + ".W", m.leg.convs[b].weights);
    WriteLabeledVector(os, "conv" + std::to_string(b) + ".b", m.leg.convs[b].bias);
  }
  WriteLabeledMatrix(os, "hidden.W", m.leg.hidden.weights);
  WriteLabeledVector(os, "hidden.b", m.leg.hidden.bias);
  WriteLabeledMatrix(os, "highway.W_H", m.head.highway.w_h);
  WriteLabeledVector(os, "highway.b_H", m.head.highway.b_h);
  WriteLabeledMatrix(os, "highway.W_T", m.head.highway.w_t);
  WriteLabeledVector(os, "highway.b_T", m.head.highway.b_t);
  WriteLabeledMatrix(os, "output.W", m.head.output.weights);
  WriteLabeledVector(os, "output.b", m.head.output.bias);
  for (size_t r = 0; r < m.references.size(); ++r) {
    const Tensor3 &t = m.references[r];
    os << "reference " << m.reference_ids[r] << '\n';
    WriteMatrixBlock(os, Eigen::Map<const RowMatrix>(t.data().data(), t.height(), t.width()),
                     kModelDigits);
  }
  if (!os) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

SiameseModel LoadSiamese(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    std::string line;
    std::getline(is, line);
    KeyValueLine header(line, "siamese");
    std::getline(is, line);
    KeyValueLine leg(line, "leg");

    SiameseConfig c;
    c.config_id = static_cast<int>(header.GetInt("config"));
    c.input_frames = static_cast<int>(header.GetInt("T"));
    c.input_dim = static_cast<int>(header.GetInt("dim"));
    c.conv_filters = SplitInts(leg.Get("filters"));
    c.kernel = static_cast<int>(leg.GetInt("kernel"));
    c.pooling = ParsePoolKind(leg.Get("pool"));
    c.pool_width = static_cast<int>(leg.GetInt("width"));
    c.pool_stride = static_cast<int>(leg.GetInt("stride"));
    c.hidden_nodes = static_cast<int>(leg.GetInt("hidden"));
    c.dropout = ParseReal(leg.Get("dropout"));
    const auto seed = static_cast<uint64_t>(std::stoull(leg.Get("seed")));
    const long refs = header.GetInt("R");

    SiameseModel m = Build(c, seed);
    m.feature_mean = ReadLabeledVector(is, "mean");
    m.feature_scale = ReadLabeledVector(is, "scale");
    Require(m.feature_mean.size() == c.input_dim && m.feature_scale.size() == c.input_dim,
            ErrorCode::kParse, "normalization block size mismatch");
    for (size_t b = 0; b < m.leg.convs.size(); ++b) {
      const std::string name = "conv" + std::to_string(b);
      AssignChecked(&m.leg.convs[b].weights, ReadLabeledMatrix(is, name + ".W"), name + ".W");
      AssignChecked(&m.leg.convs[b].bias, ReadLabeledVector(is, name + ".b"), name + ".b");
    }
    AssignChecked(&m.leg.hidden.weights, ReadLabeledMatrix(is, "hidden.W"), "hidden.W");
    AssignChecked(&m.leg.hidden.bias, ReadLabeledVector(is, "hidden.b"), "hidden.b");
    AssignChecked(&m.head.highway.w_h, ReadLabeledMatrix(is, "highway.W_H"), "highway.W_H");
    AssignChecked(&m.head.highway.b_h, ReadLabeledVector(is, "highway.b_H"), "highway.b_H");
    AssignChecked(&m.head.highway.w_t, ReadLabeledMatrix(is, "highway.W_T"), "highway.W_T");
    AssignChecked(&m.head.highway.b_t, ReadLabeledVector(is, "highway.b_T"), "highway.b_T");
    AssignChecked(&m.head.output.weights, ReadLabeledMatrix(is, "output.W"), "output.W");
    AssignChecked(&m.head.output.bias, ReadLabeledVector(is, "output.b"), "output.b");
    for (long r = 0; r < refs; ++r) {
      std::getline(is, line);
      Require(line.rfind("reference ", 0) == 0, ErrorCode::kParse,
              "expected reference block, got '" + line + "'");
      m.reference_ids.push_back(line.substr(10));
      const RowMatrix values = ReadMatrixBlock(is);
      Require(values.rows() == c.input_frames && values.cols() == c.input_dim,
              ErrorCode::kParse, "reference map has the wrong shape");
      Tensor3 t(1, c.input_frames, c.input_dim);
      std::copy(values.data(), values.data() + values.size(), t.data().begin());
      m.references.push_back(std::move(t));
    }
    return m;
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  } catch (const std::exception &e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<std::span<double>> CnnClassifier::ParameterSpans() {
  std::vector<std::span<double>> spans;
  CollectSpans(leg, &spans);
  spans.emplace_back(output.weights.data(), static_cast<size_t>(output.weights.size()));
  spans.emplace_back(output.bias.data(), static_cast<size_t>(output.bias.size()));
  return spans;
}

size_t CnnClassifier::NumParameters() const {
  return leg.NumParameters() + static_cast<size_t>(output.weights.size() + output.bias.size());
}

CnnClassifier BuildCnn(const SiameseConfig &config, uint64_t seed) {
  config.Validate();
  CnnClassifier m;
  m.config = config;
  m.leg_spec = config.Leg();
  Rng rng(seed);
  m.leg = LegParams::Init(m.leg_spec, &rng);
  Rng head_rng(DeriveSeed(seed, kHeadStream));
  m.output = DenseParams::Zeros(config.hidden_nodes, 2);
  InitUniform(&m.output.weights, &head_rng);
  m.feature_mean = Vector::Zero(config.input_dim);
  m.feature_scale = Vector::Ones(config.input_dim);
  return m;
}

void FitInputNormalization(CnnClassifier *model, const std::vector<FeatureMatrix> &features) {
  FitStats(features, model->config.input_dim, &model->feature_mean, &model->feature_scale);
}

double CnnBonafideProbability(const CnnClassifier &model, const Tensor3 &input) {
  const Vector e =
      LegForward(model.leg_spec, model.leg,
                 NormalizeInput(model.feature_mean, model.feature_scale, input), Mode::kEval,
                 nullptr, nullptr);
  return Softmax(DenseForward(model.output, e))[0];
}

TrainReport TrainCnn(CnnClassifier *model, const std::vector<Tensor3> &inputs,
                     const std::vector<int> &labels, const SiameseHyper &hyper) {
  hyper.Validate();
  Require(!inputs.empty() && inputs.size() == labels.size(), ErrorCode::kInvalidArgument,
          "CNN training needs matching non-empty inputs and labels");
  std::vector<Tensor3> norm;
  for (const auto &t : inputs)
    norm.push_back(NormalizeInput(model->feature_mean, model->feature_scale, t));

  auto sample_loss = [&](size_t i, Mode mode, Rng *rng, LegParams *leg_grad,
                         DenseParams *out_grad) {
    LegCache cache;
    const Vector e = LegForward(model->leg_spec, model->leg, norm[i], mode, rng,
                                leg_grad ? &cache : nullptr);
    const Vector p = Softmax(DenseForward(model->output, e));
    const double p_spoof = p[1];
    const int target = labels[i];
    const double loss = CrossEntropy(std::span<const double>(&p_spoof, 1),
                                     std::span<const int>(&target, 1));
    if (leg_grad) {
      const Vector dz = SoftmaxCrossEntropyGrad(p_spoof, target);
      const Vector de = DenseBackward(model->output, e, dz, out_grad);
      LegBackward(model->leg_spec, model->leg, cache, de, leg_grad);
    }
    return loss;
  };
  auto eval_loss = [&]() {
    double total = 0.0;
    for (size_t i = 0; i < norm.size(); ++i)
      total += sample_loss(i, Mode::kEval, nullptr, nullptr, nullptr);
    return total / static_cast<double>(norm.size());
  };

  TrainReport report;
  report.initial_loss = eval_loss();
  Rng order_rng(hyper.seed);
  Rng dropout_rng(DeriveSeed(hyper.seed, kDropoutStream));
  SgdOptimizer optimizer(hyper.learning_rate, hyper.momentum);
  const auto params = model->ParameterSpans();
  LegParams leg_grad = LegParams::Zeros(model->leg_spec);
  DenseParams out_grad = DenseParams::Zeros(model->config.hidden_nodes, 2);
  std::vector<std::span<double>> grad_spans;
  CollectSpans(leg_grad, &grad_spans);
  grad_spans.emplace_back(out_grad.weights.data(), static_cast<size_t>(out_grad.weights.size()));
  grad_spans.emplace_back(out_grad.bias.data(), static_cast<size_t>(out_grad.bias.size()));

  std::vector<size_t> order(norm.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    order_rng.Shuffle(&order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(hyper.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(hyper.batch_size));
      ZeroSpans(grad_spans);
      for (size_t i = start; i < end; ++i)
        epoch_loss += sample_loss(order[i], Mode::kTrain, &dropout_rng, &leg_grad, &out_grad);
      ScaleSpans(grad_spans, 1.0 / static_cast<double>(end - start));
      optimizer.Step(params, grad_spans);
      ++report.steps;
    }
    epoch_loss /= static_cast<double>(order.size());
    Require(std::isfinite(epoch_loss), ErrorCode::kNumerical,
            "CNN training diverged at epoch " + std::to_string(epoch + 1));
    report.epoch_losses.push_back(epoch_loss);
  }
  report.final_loss = eval_loss();
  return report;
}

}  // namespace spoofguard
