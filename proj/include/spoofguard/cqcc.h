// spoofguard/cqcc.h

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

// Constant-Q cepstral coefficients:
//   CQT -> |X|^2 -> log (floored) -> linear-frequency resampling -> DCT-II.

#ifndef SPOOFGUARD_CQCC_H_
#define SPOOFGUARD_CQCC_H_

#include <filesystem>
#include <span>

#include "spoofguard/audio_io.h"
#include "spoofguard/base.h"
#include "spoofguard/cqt.h"

namespace spoofguard {

enum class FeatureKind { kCqcc, kBottleneck };

const char *FeatureKindName(FeatureKind kind);

/// Time-major feature matrix (frames x dim). Non-empty and finite.
class FeatureMatrix {
 public:
  FeatureMatrix(RowMatrix values, FeatureKind kind);

  const RowMatrix &values() const { return values_; }
  Eigen::Index num_frames() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  FeatureKind kind() const { return kind_; }

 private:
  RowMatrix values_;
  FeatureKind kind_;
};

struct CqccConfig {
  CqtConfig cqt;
  double log_floor = 1e-10;
  int resample_bins = 256;
  int num_coeffs = 90;

  void Validate() const;
};

/// ln(max(|X|^2, floor)) elementwise.
RowMatrix PowerLogSpectrum(const ComplexSpectrogram &spec, double log_floor);

/// Linear interpolation of each row (sampled at `bin_frequencies`) onto
/// `num_points` equally spaced frequencies spanning the first and last bin.
RowMatrix UniformResample(const RowMatrix &log_spec,
                          std::span<const double> bin_frequencies,
                          int num_points);

/// Orthonormal DCT-II basis, num_coeffs x length.
RowMatrix DctBasis(int length, int num_coeffs);

/// Orthonormal DCT-II of each row, keeping coefficients [0, num_coeffs).
FeatureMatrix DctRows(const RowMatrix &matrix, int num_coeffs);

/// Holds the kernel bank and DCT basis so that many utterances can share
/// them. Extract() is const and safe to call concurrently.
class CqccExtractor {
 public:
  explicit CqccExtractor(const CqccConfig &config);

  const CqccConfig &config() const { return config_; }
  FeatureMatrix Extract(const AudioBuffer &buffer) const;

 private:
  CqccConfig config_;
  CqtKernelBank kernels_;
  RowMatrix dct_basis_;
};

FeatureMatrix ExtractCqcc(const AudioBuffer &buffer, const CqccConfig &config);

/// `dim=<D> frames=<T>` header then T rows of D values at 9 significant
/// digits.
void WriteFeatureFile(const FeatureMatrix &features,
                      const std::filesystem::path &path);
FeatureMatrix ReadFeatureFile(const std::filesystem::path &path,
                              FeatureKind kind = FeatureKind::kCqcc);

}  // namespace spoofguard

#endif  // SPOOFGUARD_CQCC_H_
