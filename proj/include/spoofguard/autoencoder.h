// spoofguard/autoencoder.h

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

// X x Y x X autoencoder used to compress per-frame cepstra. The hidden layer
// is sigmoid, the output layer linear, and the objective is
//
//   J = (1/m) sum_i 1/2 |x_i - xhat_i|^2 + lambda/2 (|W1|_F^2 + |W2|_F^2)
//
// with biases left out of the penalty. Inputs are standardized with
// per-dimension statistics that travel with the model.

#ifndef SPOOFGUARD_AUTOENCODER_H_
#define SPOOFGUARD_AUTOENCODER_H_

#include <filesystem>
#include <vector>

#include "spoofguard/base.h"
#include "spoofguard/cqcc.h"

namespace spoofguard {

struct AutoencoderModel {
  RowMatrix w1;  // Y x X
  Vector b1;     // Y
  RowMatrix w2;  // X x Y
  Vector b2;     // X
  Vector input_mean;   // X, subtracted before encoding
  Vector input_scale;  // X, divides after mean removal

  /// Zero parameters and identity standardization.
  static AutoencoderModel Zeros(int input_dim, int bottleneck_dim);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int bottleneck_dim() const { return static_cast<int>(w1.rows()); }
  void Validate() const;
};

struct AeHyper {
  double lambda = 1e-4;
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 64;
  uint64_t seed = 1;

  void Validate() const;
};

struct AeForward {
  Vector bottleneck;
  Vector reconstruction;
};

struct AeGradients {
  RowMatrix w1, w2;
  Vector b1, b2;
};

/// Forward pass on an already standardized input vector.
AeForward AeForwardPass(const AutoencoderModel &model, const Vector &x);

/// Objective over a batch (rows are standardized samples).
double AeLoss(const AutoencoderModel &model, const RowMatrix &batch,
              double lambda);

/// Analytic gradient of AeLoss with respect to every parameter.
AeGradients AeGrad(const AutoencoderModel &model, const RowMatrix &batch,
                   double lambda);

struct AeTrainReport {
  std::vector<double> epoch_losses;  // [0] is the loss before any update
};

/// Mini-batch gradient descent on all frames of `pool`. Standardization
/// statistics are fitted on the pool first.
AutoencoderModel AeTrain(const std::vector<FeatureMatrix> &pool,
                         int bottleneck_dim, const AeHyper &hyper,
                         AeTrainReport *report = nullptr);

/// Bottleneck activations of every frame (standardization applied).
FeatureMatrix AeEncode(const AutoencoderModel &model,
                       const FeatureMatrix &features);

/// Applies the model's input standardization to each row.
RowMatrix AeStandardize(const AutoencoderModel &model, const RowMatrix &frames);

void SaveAutoencoder(const AutoencoderModel &model,
                     const std::filesystem::path &path);
AutoencoderModel LoadAutoencoder(const std::filesystem::path &path);
void WriteAutoencoder(std::ostream &os, const AutoencoderModel &model);
AutoencoderModel ReadAutoencoder(std::istream &is);

}  // namespace spoofguard

#endif  // SPOOFGUARD_AUTOENCODER_H_
