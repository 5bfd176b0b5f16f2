// spoofguard/cqt.h

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

#ifndef SPOOFGUARD_CQT_H_
#define SPOOFGUARD_CQT_H_

#include <span>
#include <vector>

#include "spoofguard/audio_io.h"
#include "spoofguard/base.h"

namespace spoofguard {

/// Constant-Q analysis parameters. Bin k sits at f_min * 2^(k / B); the bin
/// count is ceil(B * log2(f_max / f_min)).
struct CqtConfig {
  double f_min_hz = 62.5;
  double f_max_hz = 8000.0;
  int bins_per_octave = 24;
  int sample_rate_hz = 16000;
  size_t hop_length = 128;

  void Validate() const;
  int NumBins() const;
  /// Q = 1 / (2^(1/B) - 1).
  double QFactor() const;
};

/// Per-bin Hann-windowed complex exponentials, L1-normalized windows. Each
/// kernel is stored split into real and imaginary parts, indexed relative to
/// its own start; sample `n` of kernel k pairs with signal sample
/// (frame centre - half_length(k) + n).
class CqtKernelBank {
 public:
  explicit CqtKernelBank(const CqtConfig &config);

  const CqtConfig &config() const { return config_; }
  int num_bins() const { return static_cast<int>(frequencies_.size()); }
  double q_factor() const { return q_; }
  const std::vector<double> &center_frequencies() const { return frequencies_; }
  size_t window_length(int k) const { return real_[k].size(); }
  size_t half_length(int k) const { return real_[k].size() / 2; }
  std::span<const double> real_part(int k) const { return real_[k]; }
  std::span<const double> imag_part(int k) const { return imag_[k]; }

 private:
  CqtConfig config_;
  double q_ = 0.0;
  std::vector<double> frequencies_;
  std::vector<std::vector<double>> real_;
  std::vector<std::vector<double>> imag_;
};

/// Longest kernel allowed, in seconds of audio.
inline constexpr double kMaxKernelSeconds = 2.0;

CqtKernelBank DesignKernels(const CqtConfig &config);

struct ComplexSpectrogram {
  Eigen::MatrixXcd values;  // frames x bins
  std::vector<double> bin_frequencies;
  size_t hop_length = 0;

  Eigen::Index num_frames() const { return values.rows(); }
  Eigen::Index num_bins() const { return values.cols(); }
};

/// Number of analysis frames for a signal of n samples: frames are centred at
/// t * hop for every t with t * hop < n.
size_t CqtNumFrames(size_t num_samples, size_t hop_length);

/// Direct evaluation: entry (t, k) is the inner product of kernel k with the
/// signal centred at t * hop, zero-padded beyond the edges.
ComplexSpectrogram Cqt(const AudioBuffer &buffer, const CqtKernelBank &kernels);

}  // namespace spoofguard

#endif  // SPOOFGUARD_CQT_H_
