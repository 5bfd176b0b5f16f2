// autoencoder.cc

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

#include "spoofguard/autoencoder.h"

#include <cmath>
#include <fstream>
#include <numeric>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

namespace {

RowMatrix Sigmoid(const RowMatrix &z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

void RequireBatch(const AutoencoderModel &model, const RowMatrix &batch) {
  Require(batch.rows() > 0, ErrorCode::kInvalidArgument, "empty batch");
  Require(batch.cols() == model.input_dim(), ErrorCode::kShapeMismatch,
          "batch width " + std::to_string(batch.cols()) +
              " does not match autoencoder input " +
              std::to_string(model.input_dim()));
}

}  // namespace

AutoencoderModel AutoencoderModel::Zeros(int input_dim, int bottleneck_dim) {
  Require(input_dim > 0 && bottleneck_dim > 0, ErrorCode::kInvalidArgument,
          "autoencoder dims must be positive");
  AutoencoderModel m;
  m.w1 = RowMatrix::Zero(bottleneck_dim, input_dim);
  m.b1 = Vector::Zero(bottleneck_dim);
  m.w2 = RowMatrix::Zero(input_dim, bottleneck_dim);
  m.b2 = Vector::Zero(input_dim);
  m.input_mean = Vector::Zero(input_dim);
  m.input_scale = Vector::Ones(input_dim);
  return m;
}

void AutoencoderModel::Validate() const {
  const auto x = w1.cols(), y = w1.rows();
  Require(x > 0 && y > 0 && b1.size() == y && w2.rows() == x && w2.cols() == y &&
              b2.size() == x && input_mean.size() == x && input_scale.size() == x,
          ErrorCode::kShapeMismatch, "inconsistent autoencoder shapes");
  Require(w1.allFinite() && w2.allFinite() && b1.allFinite() && b2.allFinite(),
          ErrorCode::kNumerical, "non-finite autoencoder parameter");
  Require((input_scale.array() > 0.0).all(), ErrorCode::kNumerical,
          "autoencoder input scale must be positive");
}

void AeHyper::Validate() const {
  Require(lambda >= 0.0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
  Require(learning_rate > 0.0, ErrorCode::kInvalidArgument,
          "learning rate must be > 0");
  Require(epochs >= 1 && batch_size >= 1, ErrorCode::kInvalidArgument,
          "epochs and batch size must be >= 1");
}

AeForward AeForwardPass(const AutoencoderModel &model, const Vector &x) {
  Require(x.size() == model.input_dim(), ErrorCode::kShapeMismatch,
          "input dimension mismatch");
  Require(x.allFinite(), ErrorCode::kNumerical, "non-finite autoencoder input");
  AeForward out;
  const Vector z = model.w1 * x + model.b1;
  out.bottleneck = (1.0 + (-z.array()).exp()).inverse().matrix();
  out.reconstruction = model.w2 * out.bottleneck + model.b2;
  return out;
}

double AeLoss(const AutoencoderModel &model, const RowMatrix &batch,
              double lambda) {
  RequireBatch(model, batch);
  const RowMatrix hidden =
      Sigmoid((batch * model.w1.transpose()).rowwise() + model.b1.transpose());
  const RowMatrix recon =
      (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();
  const double data = 0.5 * (batch - recon).squaredNorm() / batch.rows();
  const double penalty =
      0.5 * lambda * (model.w1.squaredNorm() + model.w2.squaredNorm());
  return data + penalty;
}

AeGradients AeGrad(const AutoencoderModel &model, const RowMatrix &batch,
                   double lambda) {
  RequireBatch(model, batch);
  const double m = static_cast<double>(batch.rows());
  const RowMatrix hidden =
      Sigmoid((batch * model.w1.transpose()).rowwise() + model.b1.transpose());
  const RowMatrix recon =
      (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();
  const RowMatrix d_recon = (recon - batch) / m;
  const RowMatrix d_hidden = d_recon * model.w2;
  const RowMatrix d_pre =
      (d_hidden.array() * hidden.array() * (1.0 - hidden.array())).matrix();

  AeGradients g;
  g.w2 = d_recon.transpose() * hidden + lambda * model.w2;
  g.b2 = d_recon.colwise().sum().transpose();
  g.w1 = d_pre.transpose() * batch + lambda * model.w1;
  g.b1 = d_pre.colwise().sum().transpose();
  return g;
}

RowMatrix AeStandardize(const AutoencoderModel &model, const RowMatrix &frames) {
  Require(frames.cols() == model.input_dim(), ErrorCode::kShapeMismatch,
          "feature dim " + std::to_string(frames.cols()) +
              " does not match autoencoder input " +
              std::to_string(model.input_dim()));
  RowMatrix out = frames.rowwise() - model.input_mean.transpose();
  out.array().rowwise() /= model.input_scale.transpose().array();
  return out;
}

AutoencoderModel AeTrain(const std::vector<FeatureMatrix> &pool,
                         int bottleneck_dim, const AeHyper &hyper,
                         AeTrainReport *report) {
  hyper.Validate();
  Require(!pool.empty(), ErrorCode::kInvalidArgument, "empty training pool");
  const Eigen::Index x_dim = pool.front().dim();
  Require(bottleneck_dim > 0 && bottleneck_dim < x_dim,
          ErrorCode::kInvalidArgument,
          "bottleneck " + std::to_string(bottleneck_dim) +
              " must be smaller than input " + std::to_string(x_dim));

  Eigen::Index total = 0;
  for (const auto &f : pool) {
    Require(f.dim() == x_dim, ErrorCode::kShapeMismatch,
            "training pool mixes feature dimensions");
    total += f.num_frames();
  }
  RowMatrix data(total, x_dim);
  Eigen::Index row = 0;
  for (const auto &f : pool) {
    data.middleRows(row, f.num_frames()) = f.values();
    row += f.num_frames();
  }

  AutoencoderModel model = AutoencoderModel::Zeros(static_cast<int>(x_dim),
                                                   bottleneck_dim);
  model.input_mean = data.colwise().mean().transpose();
  const RowMatrix centered = data.rowwise() - model.input_mean.transpose();
  Vector var = centered.colwise().squaredNorm().transpose() / static_cast<double>(total);
  // Constant dimensions keep unit scale.
  model.input_scale = var.unaryExpr([](double v) { return v > 1e-12 ? std::sqrt(v) : 1.0; });
  const RowMatrix standardized = AeStandardize(model, data);

  Rng rng(hyper.seed);
  const double r = std::sqrt(6.0 / static_cast<double>(x_dim + bottleneck_dim));
  for (Eigen::Index i = 0; i < model.w1.size(); ++i)
    model.w1.data()[i] = rng.Uniform(-r, r);
  for (Eigen::Index i = 0; i < model.w2.size(); ++i)
    model.w2.data()[i] = rng.Uniform(-r, r);

  AeTrainReport local;
  AeTrainReport &rep = report ? *report : local;
  rep.epoch_losses.clear();
  rep.epoch_losses.push_back(AeLoss(model, standardized, hyper.lambda));

  std::vector<Eigen::Index> order(static_cast<size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  RowMatrix batch;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.Shuffle(&order);
    for (Eigen::Index start = 0; start < total; start += hyper.batch_size) {
      const Eigen::Index n = std::min<Eigen::Index>(hyper.batch_size, total - start);
      batch.resize(n, x_dim);
      for (Eigen::Index i = 0; i < n; ++i)
        batch.row(i) = standardized.row(order[static_cast<size_t>(start + i)]);
      const AeGradients g = AeGrad(model, batch, hyper.lambda);
      model.w1 -= hyper.learning_rate * g.w1;
      model.b1 -= hyper.learning_rate * g.b1;
      model.w2 -= hyper.learning_rate * g.w2;
      model.b2 -= hyper.learning_rate * g.b2;
    }
    const double loss = AeLoss(model, standardized, hyper.lambda);
    Require(std::isfinite(loss), ErrorCode::kNumerical,
            "autoencoder training diverged at epoch " + std::to_string(epoch + 1));
    rep.epoch_losses.push_back(loss);
  }
  return model;
}

FeatureMatrix AeEncode(const AutoencoderModel &model,
                       const FeatureMatrix &features) {
  const RowMatrix x = AeStandardize(model, features.values());
  return FeatureMatrix(
      Sigmoid((x * model.w1.transpose()).rowwise() + model.b1.transpose()),
      FeatureKind::kBottleneck);
}

void WriteAutoencoder(std::ostream &os, const AutoencoderModel &model) {
  model.Validate();
  os << "ae X=" << model.input_dim() << " Y=" << model.bottleneck_dim() << '\n';
  os << "mean\n";
  WriteVectorBlock(os, model.input_mean, kModelDigits);
  os << "scale\n";
  WriteVectorBlock(os, model.input_scale, kModelDigits);
  os << "W1\n";
  WriteMatrixBlock(os, model.w1, kModelDigits);
  os << "b1\n";
  WriteVectorBlock(os, model.b1, kModelDigits);
  os << "W2\n";
  WriteMatrixBlock(os, model.w2, kModelDigits);
  os << "b2\n";
  WriteVectorBlock(os, model.b2, kModelDigits);
}

AutoencoderModel ReadAutoencoder(std::istream &is) {
  std::string header;
  if (!std::getline(is, header)) Fail(ErrorCode::kParse, "empty model file");
  KeyValueLine kv(header, "ae");
  const long x = kv.GetInt("X"), y = kv.GetInt("Y");
  AutoencoderModel m;
  ExpectLine(is, "mean");
  m.input_mean = ReadVectorBlock(is);
  ExpectLine(is, "scale");
  m.input_scale = ReadVectorBlock(is);
  ExpectLine(is, "W1");
  m.w1 = ReadMatrixBlock(is);
  ExpectLine(is, "b1");
  m.b1 = ReadVectorBlock(is);
  ExpectLine(is, "W2");
  m.w2 = ReadMatrixBlock(is);
  ExpectLine(is, "b2");
  m.b2 = ReadVectorBlock(is);
  m.Validate();
  Require(m.input_dim() == x && m.bottleneck_dim() == y, ErrorCode::kParse,
          "autoencoder header does not match its blocks");
  return m;
}

void SaveAutoencoder(const AutoencoderModel &model,
                     const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteAutoencoder(out, model);
}

AutoencoderModel LoadAutoencoder(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  return ReadAutoencoder(in);
}

}  // namespace spoofguard
