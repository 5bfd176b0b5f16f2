// cqt.cc

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

#include "spoofguard/cqt.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace spoofguard {

void CqtConfig::Validate() const {
  Require(sample_rate_hz > 0, ErrorCode::kInvalidArgument,
          "cqt: sample rate must be positive");
  Require(bins_per_octave >= 1, ErrorCode::kInvalidArgument,
          "cqt: bins_per_octave must be >= 1");
  Require(hop_length > 0, ErrorCode::kInvalidArgument, "cqt: hop must be > 0");
  Require(f_min_hz > 0.0 && f_min_hz < f_max_hz, ErrorCode::kInvalidArgument,
          "cqt: require 0 < f_min < f_max");
  Require(f_max_hz <= sample_rate_hz / 2.0, ErrorCode::kInvalidArgument,
          "cqt: f_max " + std::to_string(f_max_hz) + " Hz is above Nyquist");
}

int CqtConfig::NumBins() const {
  // The small slack keeps exact octave ratios from rounding up a bin.
  const double span = bins_per_octave * std::log2(f_max_hz / f_min_hz);
  return std::max(1, static_cast<int>(std::ceil(span - 1e-9)));
}

double CqtConfig::QFactor() const {
  return 1.0 / (std::exp2(1.0 / bins_per_octave) - 1.0);
}

CqtKernelBank::CqtKernelBank(const CqtConfig &config) : config_(config) {
  config_.Validate();
  q_ = config_.QFactor();
  const double fs = config_.sample_rate_hz;
  const double longest = std::ceil(q_ * fs / config_.f_min_hz);
  Require(longest <= kMaxKernelSeconds * fs, ErrorCode::kInvalidArgument,
          "cqt: lowest bin needs a " + std::to_string(longest / fs) +
              " s kernel; raise f_min");

  const int bins = config_.NumBins();
  frequencies_.resize(bins);
  real_.resize(bins);
  imag_.resize(bins);
  for (int k = 0; k < bins; ++k) {
    const double fk =
        config_.f_min_hz * std::exp2(static_cast<double>(k) / config_.bins_per_octave);
    frequencies_[k] = fk;
    const auto len = static_cast<size_t>(std::ceil(q_ * fs / fk));
    const auto half = static_cast<double>(len / 2);

    std::vector<double> window(len);
    double total = 0.0;
    for (size_t n = 0; n < len; ++n) {
      const double s = std::sin(std::numbers::pi * (n + 0.5) / len);
      window[n] = s * s;
      total += window[n];
    }
    auto &re = real_[k];
    auto &im = imag_[k];
    re.resize(len);
    im.resize(len);
    const double omega = 2.0 * std::numbers::pi * fk / fs;
    for (size_t n = 0; n < len; ++n) {
      // Phase is referenced to the frame centre so that a one-hop input shift
      // reproduces the frame exactly.
      const double phase = omega * (static_cast<double>(n) - half);
      const double w = window[n] / total;
      re[n] = w * std::cos(phase);
      im[n] = -w * std::sin(phase);
    }
  }
}

CqtKernelBank DesignKernels(const CqtConfig &config) {
  return CqtKernelBank(config);
}

size_t CqtNumFrames(size_t num_samples, size_t hop_length) {
  if (num_samples == 0) return 0;
  return (num_samples - 1) / hop_length + 1;
}

ComplexSpectrogram Cqt(const AudioBuffer &buffer, const CqtKernelBank &kernels) {
  const CqtConfig &cfg = kernels.config();
  RequireSampleRate(buffer, cfg.sample_rate_hz);
  Require(buffer.size() >= cfg.hop_length, ErrorCode::kInvalidArgument,
          "cqt: signal shorter than one hop");

  const auto x = buffer.samples();
  const auto n_samples = static_cast<std::ptrdiff_t>(x.size());
  const size_t frames = CqtNumFrames(x.size(), cfg.hop_length);
  const int bins = kernels.num_bins();

  ComplexSpectrogram out;
  out.values.resize(static_cast<Eigen::Index>(frames), bins);
  out.bin_frequencies = kernels.center_frequencies();
  out.hop_length = cfg.hop_length;

  for (int k = 0; k < bins; ++k) {
    const auto re = kernels.real_part(k);
    const auto im = kernels.imag_part(k);
    const auto len = static_cast<std::ptrdiff_t>(re.size());
    const auto half = static_cast<std::ptrdiff_t>(kernels.half_length(k));
    for (size_t t = 0; t < frames; ++t) {
      const std::ptrdiff_t start =
          static_cast<std::ptrdiff_t>(t * cfg.hop_length) - half;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
      const std::ptrdiff_t hi = std::min(len, n_samples - start);
      double acc_re = 0.0, acc_im = 0.0;
      if (hi > lo) {
        const double *xs = x.data() + (start + lo);
        const double *kr = re.data() + lo;
        const double *ki = im.data() + lo;
        const Eigen::Index count = hi - lo;
        const Eigen::Map<const Eigen::VectorXd> segment(xs, count);
        acc_re = segment.dot(Eigen::Map<const Eigen::VectorXd>(kr, count));
        acc_im = segment.dot(Eigen::Map<const Eigen::VectorXd>(ki, count));
      }
      out.values(static_cast<Eigen::Index>(t), k) = {acc_re, acc_im};
    }
  }
  return out;
}

}  // namespace spoofguard
