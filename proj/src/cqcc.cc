// cqcc.cc

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

#include "spoofguard/cqcc.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

const char *FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kCqcc ? "cqcc" : "bottleneck";
}

FeatureMatrix::FeatureMatrix(RowMatrix values, FeatureKind kind)
    : values_(std::move(values)), kind_(kind) {
  Require(values_.rows() > 0 && values_.cols() > 0, ErrorCode::kInvalidArgument,
          "feature matrix must have frames and dimensions");
  Require(values_.allFinite(), ErrorCode::kNumerical,
          "feature matrix has non-finite entries");
}

void CqccConfig::Validate() const {
  cqt.Validate();
  Require(log_floor > 0.0, ErrorCode::kInvalidArgument, "log_floor must be > 0");
  Require(resample_bins >= 2, ErrorCode::kInvalidArgument,
          "resample_bins must be >= 2");
  Require(num_coeffs >= 1 && num_coeffs <= resample_bins,
          ErrorCode::kInvalidArgument,
          "num_coeffs must lie in [1, resample_bins]");
}

RowMatrix PowerLogSpectrum(const ComplexSpectrogram &spec, double log_floor) {
  Require(log_floor > 0.0, ErrorCode::kInvalidArgument, "log_floor must be > 0");
  RowMatrix out(spec.values.rows(), spec.values.cols());
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    for (Eigen::Index k = 0; k < out.cols(); ++k)
      out(t, k) = std::log(std::max(std::norm(spec.values(t, k)), log_floor));
  return out;
}

RowMatrix UniformResample(const RowMatrix &log_spec,
                          std::span<const double> bin_frequencies,
                          int num_points) {
  Require(num_points >= 2, ErrorCode::kInvalidArgument,
          "uniform resampling needs at least 2 points");
  const auto bins = static_cast<Eigen::Index>(bin_frequencies.size());
  Require(bins >= 2, ErrorCode::kInvalidArgument,
          "uniform resampling needs at least 2 source bins");
  Require(log_spec.cols() == bins, ErrorCode::kShapeMismatch,
          "spectrum width does not match bin frequency count");

  const double f_lo = bin_frequencies.front();
  const double f_hi = bin_frequencies.back();
  // Interpolation plan shared by all rows: target j lies in [f_i, f_{i+1}].
  std::vector<Eigen::Index> left(num_points);
  std::vector<double> frac(num_points);
  Eigen::Index i = 0;
  for (int j = 0; j < num_points; ++j) {
    const double f = (j == num_points - 1)
                         ? f_hi
                         : f_lo + (f_hi - f_lo) * j / (num_points - 1);
    while (i + 2 < bins && bin_frequencies[i + 1] <= f) ++i;
    left[j] = i;
    frac[j] = (f - bin_frequencies[i]) / (bin_frequencies[i + 1] - bin_frequencies[i]);
  }

  RowMatrix out(log_spec.rows(), num_points);
  for (Eigen::Index t = 0; t < log_spec.rows(); ++t) {
    for (int j = 0; j < num_points; ++j) {
      const double a = log_spec(t, left[j]);
      const double b = log_spec(t, left[j] + 1);
      out(t, j) = a + frac[j] * (b - a);
    }
  }
  return out;
}

RowMatrix DctBasis(int length, int num_coeffs) {
  Require(length >= 1 && num_coeffs >= 1, ErrorCode::kInvalidArgument,
          "DCT sizes must be positive");
  Require(num_coeffs <= length, ErrorCode::kInvalidArgument,
          "cannot keep " + std::to_string(num_coeffs) + " DCT coefficients of a " +
              std::to_string(length) + "-point transform");
  RowMatrix basis(num_coeffs, length);
  const double s0 = std::sqrt(1.0 / length);
  const double sk = std::sqrt(2.0 / length);
  for (int k = 0; k < num_coeffs; ++k)
    for (int n = 0; n < length; ++n)
      basis(k, n) = (k == 0 ? s0 : sk) *
                    std::cos(std::numbers::pi * (n + 0.5) * k / length);
  return basis;
}

FeatureMatrix DctRows(const RowMatrix &matrix, int num_coeffs) {
  const RowMatrix basis = DctBasis(static_cast<int>(matrix.cols()), num_coeffs);
  return FeatureMatrix(matrix * basis.transpose(), FeatureKind::kCqcc);
}

CqccExtractor::CqccExtractor(const CqccConfig &config)
    : config_(config), kernels_((config.Validate(), config.cqt)) {
  Require(kernels_.num_bins() >= 2, ErrorCode::kInvalidArgument,
          "cqcc needs at least two CQT bins");
  dct_basis_ = DctBasis(config_.resample_bins, config_.num_coeffs);
}

FeatureMatrix CqccExtractor::Extract(const AudioBuffer &buffer) const {
  Require(!buffer.empty(), ErrorCode::kInvalidArgument, "empty audio buffer");
  const ComplexSpectrogram spec = Cqt(buffer, kernels_);
  const RowMatrix log_power = PowerLogSpectrum(spec, config_.log_floor);
  const RowMatrix uniform =
      UniformResample(log_power, spec.bin_frequencies, config_.resample_bins);
  return FeatureMatrix(uniform * dct_basis_.transpose(), FeatureKind::kCqcc);
}

FeatureMatrix ExtractCqcc(const AudioBuffer &buffer, const CqccConfig &config) {
  return CqccExtractor(config).Extract(buffer);
}

void WriteFeatureFile(const FeatureMatrix &features,
                      const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteMatrixBlock(out, features.values(), kFeatureDigits);
}

FeatureMatrix ReadFeatureFile(const std::filesystem::path &path,
                              FeatureKind kind) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return FeatureMatrix(ReadMatrixBlock(in), kind);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace spoofguard
