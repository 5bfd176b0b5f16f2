// spoofguard/audio_io.h

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

#ifndef SPOOFGUARD_AUDIO_IO_H_
#define SPOOFGUARD_AUDIO_IO_H_

#include <filesystem>
#include <span>
#include <vector>

#include "spoofguard/base.h"

namespace spoofguard {

/// Mono waveform. Immutable once constructed; amplitudes are finite.
class AudioBuffer {
 public:
  AudioBuffer(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const { return samples_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate_hz() const { return sample_rate_hz_; }
  double duration_s() const {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_hz_;
};

struct FrameGrid {
  size_t frame_length = 0;
  size_t hop_length = 0;

  void Validate() const;
  /// floor((n - frame_length) / hop) + 1, or 0 when n < frame_length.
  size_t NumFrames(size_t signal_length) const;
};

/// Reads 16-bit PCM WAV (mono, or stereo averaged to mono). Errors carry
/// kMissingFile, kMalformedHeader or kUnsupportedEncoding.
AudioBuffer LoadWav(const std::filesystem::path &path);

/// Writes 16-bit PCM mono. Amplitudes outside [-1, 1] are rejected.
void WriteWav(const AudioBuffer &buffer, const std::filesystem::path &path);

/// In-memory variants used by the file functions.
std::vector<uint8_t> EncodeWav(const AudioBuffer &buffer);
AudioBuffer DecodeWav(std::span<const uint8_t> bytes);

/// Frame i covers samples [i*hop, i*hop + frame_length); the remainder is
/// dropped.
std::vector<std::vector<double>> FrameSignal(const AudioBuffer &buffer,
                                             const FrameGrid &grid);

AudioBuffer Sine(double frequency_hz, double amplitude, size_t num_samples,
                 int sample_rate_hz, double phase = 0.0);

/// Checks the buffer rate against the configured extraction rate.
void RequireSampleRate(const AudioBuffer &buffer, int expected_hz);

}  // namespace spoofguard

#endif  // SPOOFGUARD_AUDIO_IO_H_
