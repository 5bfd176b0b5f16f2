// audio_io.cc

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

#include "spoofguard/audio_io.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

namespace spoofguard {

namespace {

constexpr double kPcmScale = 32768.0;

uint16_t ReadU16(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}

uint32_t ReadU32(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) |
         (static_cast<uint32_t>(b[off + 3]) << 24);
}

void PutU16(std::vector<uint8_t> *out, uint16_t v) {
  out->push_back(static_cast<uint8_t>(v & 0xff));
  out->push_back(static_cast<uint8_t>(v >> 8));
}

void PutU32(std::vector<uint8_t> *out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void PutTag(std::vector<uint8_t> *out, const char *tag) {
  out->insert(out->end(), tag, tag + 4);
}

bool TagIs(std::span<const uint8_t> b, size_t off, const char *tag) {
  return std::memcmp(b.data() + off, tag, 4) == 0;
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  Require(sample_rate_hz_ > 0, ErrorCode::kInvalidArgument,
          "sample rate must be positive");
  for (double s : samples_)
    Require(std::isfinite(s), ErrorCode::kNumerical, "non-finite audio sample");
}

void FrameGrid::Validate() const {
  Require(hop_length > 0 && hop_length <= frame_length,
          ErrorCode::kInvalidArgument,
          "frame grid requires 0 < hop <= frame length");
}

size_t FrameGrid::NumFrames(size_t signal_length) const {
  Validate();
  if (signal_length < frame_length) return 0;
  return (signal_length - frame_length) / hop_length + 1;
}

std::vector<uint8_t> EncodeWav(const AudioBuffer &buffer) {
  const auto samples = buffer.samples();
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_bytes);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);  // PCM
  PutU16(&out, 1);  // mono
  PutU32(&out, static_cast<uint32_t>(buffer.sample_rate_hz()));
  PutU32(&out, static_cast<uint32_t>(buffer.sample_rate_hz()) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  PutTag(&out, "data");
  PutU32(&out, data_bytes);
  for (double s : samples) {
    if (!(s >= -1.0 && s <= 1.0))
      Fail(ErrorCode::kOutOfRange,
           "amplitude " + std::to_string(s) + " outside [-1, 1]");
    long q = std::lround(s * kPcmScale);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    PutU16(&out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  return out;
}

AudioBuffer DecodeWav(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || !TagIs(bytes, 0, "RIFF") || !TagIs(bytes, 8, "WAVE"))
    Fail(ErrorCode::kMalformedHeader, "not a RIFF/WAVE file");

  bool have_fmt = false;
  int channels = 0;
  uint32_t sample_rate = 0;
  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const uint32_t chunk_size = ReadU32(bytes, off + 4);
    const size_t body = off + 8;
    if (chunk_size > bytes.size() - body)
      Fail(ErrorCode::kMalformedHeader, "chunk extends past end of file");
    if (TagIs(bytes, off, "fmt ")) {
      if (chunk_size < 16)
        Fail(ErrorCode::kMalformedHeader, "fmt chunk too short");
      const uint16_t format = ReadU16(bytes, body);
      channels = ReadU16(bytes, body + 2);
      sample_rate = ReadU32(bytes, body + 4);
      const uint16_t bits = ReadU16(bytes, body + 14);
      if (format != 1)
        Fail(ErrorCode::kUnsupportedEncoding,
             "audio format " + std::to_string(format) + " is not PCM");
      if (bits != 16)
        Fail(ErrorCode::kUnsupportedEncoding,
             std::to_string(bits) + "-bit samples are not supported");
      if (channels != 1 && channels != 2)
        Fail(ErrorCode::kUnsupportedEncoding,
             std::to_string(channels) + " channels are not supported");
      if (sample_rate == 0)
        Fail(ErrorCode::kMalformedHeader, "zero sample rate");
      have_fmt = true;
    } else if (TagIs(bytes, off, "data")) {
      if (!have_fmt) Fail(ErrorCode::kMalformedHeader, "data chunk before fmt");
      const size_t frame_bytes = 2 * static_cast<size_t>(channels);
      const size_t n = chunk_size / frame_bytes;
      std::vector<double> samples(n);
      for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          const auto v = static_cast<int16_t>(
              ReadU16(bytes, body + i * frame_bytes + 2 * static_cast<size_t>(c)));
          acc += v / kPcmScale;
        }
        samples[i] = acc / channels;
      }
      return AudioBuffer(std::move(samples), static_cast<int>(sample_rate));
    }
    off = body + chunk_size + (chunk_size & 1u);
  }
  Fail(ErrorCode::kMalformedHeader,
       have_fmt ? "no data chunk" : "no fmt chunk");
}

AudioBuffer LoadWav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteWav(const AudioBuffer &buffer, const std::filesystem::path &path) {
  const std::vector<uint8_t> bytes = EncodeWav(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path.string());
}

std::vector<std::vector<double>> FrameSignal(const AudioBuffer &buffer,
                                             const FrameGrid &grid) {
  grid.Validate();
  if (buffer.size() < grid.frame_length)
    Fail(ErrorCode::kInvalidArgument,
         "signal of " + std::to_string(buffer.size()) +
             " samples is shorter than one frame");
  const size_t n = grid.NumFrames(buffer.size());
  const auto s = buffer.samples();
  std::vector<std::vector<double>> frames;
  frames.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    auto begin = s.begin() + static_cast<std::ptrdiff_t>(i * grid.hop_length);
    frames.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(grid.frame_length));
  }
  return frames;
}

AudioBuffer Sine(double frequency_hz, double amplitude, size_t num_samples,
                 int sample_rate_hz, double phase) {
  std::vector<double> s(num_samples);
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  for (size_t n = 0; n < num_samples; ++n)
    s[n] = amplitude * std::sin(w * static_cast<double>(n) + phase);
  return AudioBuffer(std::move(s), sample_rate_hz);
}

void RequireSampleRate(const AudioBuffer &buffer, int expected_hz) {
  if (buffer.sample_rate_hz() != expected_hz)
    Fail(ErrorCode::kInvalidArgument,
         "sample rate " + std::to_string(buffer.sample_rate_hz()) +
             " Hz does not match configured " + std::to_string(expected_hz) +
             " Hz (resample externally)");
}

}  // namespace spoofguard
