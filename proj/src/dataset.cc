// dataset.cc

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

#include "spoofguard/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace spoofguard {

namespace {

constexpr uint64_t kSpeakerStream = 0x5000;
constexpr uint64_t kSourceStream = 0x10000000;
constexpr uint64_t kChannelStream = 0x20000000;
constexpr int kBandTaps = 1023;
constexpr double kTargetRms = 0.05;
constexpr double kPeakLimit = 0.95;
constexpr double kSourceNoiseDb = 50.0;

double Rms(const std::vector<double> &x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return std::sqrt(e / static_cast<double>(x.size()));
}

void NormalizeLevel(std::vector<double> *x) {
  const double rms = Rms(*x);
  Require(rms > 0.0, ErrorCode::kNumerical, "silent synthetic signal");
  double gain = kTargetRms / rms;
  double peak = 0.0;
  for (double v : *x) peak = std::max(peak, std::abs(v));
  if (peak * gain > kPeakLimit) gain = kPeakLimit / peak;
  for (double &v : *x) v *= gain;
}

/// y[n] = sum_k h[k] x[n + offset - k], truncated to the length of x.
std::vector<double> Convolve(const std::vector<double> &x, const std::vector<double> &h,
                             int offset) {
  const long n = static_cast<long>(x.size());
  const long m = static_cast<long>(h.size());
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    const long c = i + offset;  // x index paired with h[0]
    const long k_lo = std::max(0L, c - (n - 1));
    const long k_hi = std::min(m - 1, c);
    double acc = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) acc += h[k] * x[c - k];
    y[i] = acc;
  }
  return y;
}

struct SpeakerVoice {
  double f0;
  double formant_hz[4];
  double bandwidth_hz[4];
  double gain[4];
};

SpeakerVoice DrawVoice(const SynthConfig &config, int speaker) {
  Rng rng(DeriveSeed(config.seed, kSpeakerStream + static_cast<uint64_t>(speaker)));
  SpeakerVoice v;
  v.f0 = rng.Uniform(100.0, 220.0);
  v.formant_hz[0] = rng.Uniform(350.0, 800.0);
  v.formant_hz[1] = rng.Uniform(900.0, 2200.0);
  v.formant_hz[2] = rng.Uniform(2400.0, 3200.0);
  v.formant_hz[3] = rng.Uniform(3800.0, 5500.0);
  for (int i = 0; i < 4; ++i) v.bandwidth_hz[i] = rng.Uniform(80.0, 200.0) * (1.0 + 0.5 * i);
  v.gain[0] = 1.0;
  v.gain[1] = rng.Uniform(0.4, 0.8);
  v.gain[2] = rng.Uniform(0.2, 0.5);
  v.gain[3] = rng.Uniform(0.15, 0.35);
  return v;
}

double Envelope(const SpeakerVoice &v, double f) {
  double a = 0.05;
  for (int i = 0; i < 4; ++i) {
    const double d = (f - v.formant_hz[i]) / v.bandwidth_hz[i];
    a += v.gain[i] * std::exp(-0.5 * d * d);
  }
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Trial> ParseProtocol(std::istream &is, const std::string &source,
                                 const std::filesystem::path &audio_dir) {
  std::vector<Trial> trials;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> cols;
    for (std::string tok; ls >> tok;) cols.push_back(tok);
    if (cols.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    Require(cols.size() == 5, ErrorCode::kParse,
            where + "expected 5 columns, found " + std::to_string(cols.size()));
    Trial t;
    t.speaker_id = cols[0];
    t.utterance_id = cols[1];
    t.environment_id = cols[2];
    t.attack_id = cols[3];
    try {
      t.key = ParseTrialKey(cols[4]);
    } catch (const Error &e) {
      throw Error(ErrorCode::kParse, where + e.what());
    }
    Require((t.key == TrialKey::kBonafide) == (t.attack_id == kNoAttack), ErrorCode::kParse,
            where + "key '" + cols[4] + "' is inconsistent with attack '" + t.attack_id + "'");
    if (!audio_dir.empty()) t.audio_path = audio_dir / (t.utterance_id + ".wav");
    trials.push_back(std::move(t));
  }
  return trials;
}

std::vector<Trial> ParseProtocolFile(const std::filesystem::path &path,
                                     const std::filesystem::path &audio_dir) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  return ParseProtocol(is, path.string(), audio_dir);
}

std::string RenderProtocol(const std::vector<Trial> &trials) {
  std::string out;
  for (const auto &t : trials)
    out += t.speaker_id + ' ' + t.utterance_id + ' ' + t.environment_id + ' ' + t.attack_id +
           ' ' + TrialKeyName(t.key) + '\n';
  return out;
}

KeyCounts CountKeys(const std::vector<Trial> &trials) {
  KeyCounts c;
  for (const auto &t : trials) (t.key == TrialKey::kBonafide ? c.bonafide : c.spoof)++;
  return c;
}

std::vector<TrialKey> KeysOf(const std::vector<Trial> &trials) {
  std::vector<TrialKey> keys;
  for (const auto &t : trials) keys.push_back(t.key);
  return keys;
}

// ---------------------------------------------------------------------------

void SynthConfig::Validate() const {
  Require(num_speakers >= 1 && utterances_per_speaker >= 1, ErrorCode::kInvalidArgument,
          "synthetic corpus needs at least one speaker and utterance");
  Require(spoof_fraction > 0.0 && spoof_fraction < 1.0, ErrorCode::kInvalidArgument,
          "spoof_fraction must lie in (0, 1)");
  Require(sample_rate_hz > 0 && duration_s > 0.0 && NumSamples() >= 16,
          ErrorCode::kInvalidArgument, "synthetic duration is too short");
  Require(rir_length >= 1, ErrorCode::kInvalidArgument, "rir_length must be >= 1");
  Require(replay_low_hz > 0.0 && replay_low_hz < replay_high_hz &&
              replay_high_hz < 0.5 * sample_rate_hz,
          ErrorCode::kInvalidArgument, "replay band must lie inside (0, Nyquist)");
  Require(std::isfinite(noise_snr_db), ErrorCode::kInvalidArgument, "noise_snr_db must be finite");
}

size_t SynthConfig::NumSamples() const {
  return static_cast<size_t>(std::lround(duration_s * sample_rate_hz));
}

bool IsSpoofIndex(const SynthConfig &config, int index) {
  const double f = config.spoof_fraction;
  return std::floor((index + 1) * f) > std::floor(index * f);
}

std::string SyntheticSpeakerId(int speaker) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "SPK_%04d", speaker + 1);
  return buf;
}

std::string SyntheticUtteranceId(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "SYN_%07d", index + 1);
  return buf;
}

std::vector<double> RenderSource(const SynthConfig &config, int index) {
  config.Validate();
  Require(index >= 0 && index < config.NumUtterances(), ErrorCode::kOutOfRange,
          "utterance index out of range");
  const SpeakerVoice voice = DrawVoice(config, index / config.utterances_per_speaker);
  Rng rng(DeriveSeed(config.seed, kSourceStream + static_cast<uint64_t>(index)));
  const double fs = config.sample_rate_hz;
  const size_t n = config.NumSamples();
  const double duration = static_cast<double>(n) / fs;

  // Intonation: f0 glides between two draws, with vibrato on top.
  const double f0_start = voice.f0 * rng.Uniform(0.9, 1.1);
  const double f0_end = voice.f0 * rng.Uniform(0.9, 1.1);
  const double vib_rate = rng.Uniform(4.0, 7.0);
  const double vib_depth = rng.Uniform(0.005, 0.02);
  const double vib_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  const double tilt = rng.Uniform(0.3, 0.8);
  const double am_rate = rng.Uniform(2.0, 5.0);
  const double am_phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);

  // Vowel-like segments: each rescales the speaker's resonances.
  const int segments = 2 + static_cast<int>(rng.Below(3));
  std::vector<SpeakerVoice> vowels(static_cast<size_t>(segments), voice);
  for (auto &v : vowels) {
    for (int k = 0; k < 4; ++k) {
      v.formant_hz[k] *= rng.Uniform(0.8, 1.25);
      v.gain[k] *= rng.Uniform(0.6, 1.4);
    }
  }

  std::vector<double> theta(n);
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    theta[i] = acc;
    const double t = static_cast<double>(i) / fs;
    const double f0 = f0_start + (f0_end - f0_start) * t / duration;
    acc += 2.0 * std::numbers::pi * f0 *
           (1.0 + vib_depth * std::sin(2.0 * std::numbers::pi * vib_rate * t + vib_phase)) / fs;
  }

  // Harmonic amplitudes are interpolated linearly between segment centres.
  const double f0_ref = 0.5 * (f0_start + f0_end);
  const double f0_max = std::max(f0_start, f0_end) * (1.0 + vib_depth);
  const int harmonics = static_cast<int>(0.45 * fs / f0_max);
  std::vector<double> x(n, 0.0);
  std::vector<double> amp(static_cast<size_t>(segments));
  for (int h = 1; h <= harmonics; ++h) {
    for (int s = 0; s < segments; ++s)
      amp[static_cast<size_t>(s)] = Envelope(vowels[static_cast<size_t>(s)], h * f0_ref) /
                                    std::pow(static_cast<double>(h), tilt);
    const double phase = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    for (size_t i = 0; i < n; ++i) {
      const double pos = std::clamp(
          (static_cast<double>(i) + 0.5) / static_cast<double>(n) * segments - 0.5, 0.0,
          segments - 1.0);
      const auto s0 = static_cast<size_t>(pos);
      const size_t s1 = std::min(s0 + 1, static_cast<size_t>(segments - 1));
      const double a = amp[s0] + (amp[s1] - amp[s0]) * (pos - static_cast<double>(s0));
      x[i] += a * std::sin(h * theta[i] + phase);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] *= 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * am_rate * t + am_phase);
  }
  const size_t fade = std::min(n / 4, static_cast<size_t>(0.02 * fs));
  for (size_t i = 0; i < fade; ++i) {
    const double w = std::sin(0.5 * std::numbers::pi * static_cast<double>(i) / fade);
    x[i] *= w * w;
    x[n - 1 - i] *= w * w;
  }
  const double noise = Rms(x) * std::pow(10.0, -kSourceNoiseDb / 20.0);
  for (double &v : x) v += noise * rng.Normal();
  NormalizeLevel(&x);
  return x;
}

std::vector<double> ReplayBandFilter(const SynthConfig &config, int num_taps) {
  Require(num_taps >= 3 && num_taps % 2 == 1, ErrorCode::kInvalidArgument,
          "band filter needs an odd tap count >= 3");
  const double lo = config.replay_low_hz / config.sample_rate_hz;
  const double hi = config.replay_high_hz / config.sample_rate_hz;
  const int mid = num_taps / 2;
  std::vector<double> h(static_cast<size_t>(num_taps));
  for (int i = 0; i < num_taps; ++i) {
    const int k = i - mid;
    const double ideal =
        k == 0 ? 2.0 * (hi - lo)
               : (std::sin(2.0 * std::numbers::pi * hi * k) -
                  std::sin(2.0 * std::numbers::pi * lo * k)) /
                     (std::numbers::pi * k);
    const double a = 2.0 * std::numbers::pi * i / (num_taps - 1);
    const double blackman = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
    h[static_cast<size_t>(i)] = ideal * blackman;
  }
  return h;
}

std::vector<double> ApplyReplayChannel(const SynthConfig &config,
                                       const std::vector<double> &source, int index) {
  config.Validate();
  Require(!source.empty(), ErrorCode::kInvalidArgument, "empty replay source");
  Rng rng(DeriveSeed(config.seed, kChannelStream + static_cast<uint64_t>(index)));

  // Direct path plus an exponentially decaying noise tail (60 dB over the
  // decay length).
  const double decay = config.rir_length * rng.Uniform(0.6, 1.0) / std::log(1000.0);
  const double tail_gain = rng.Uniform(0.2, 0.4);
  std::vector<double> rir(static_cast<size_t>(config.rir_length));
  rir[0] = 1.0;
  for (size_t i = 1; i < rir.size(); ++i)
    rir[i] = tail_gain * rng.Normal() * std::exp(-static_cast<double>(i) / decay) /
             std::sqrt(decay);
  std::vector<double> y = Convolve(source, rir, 0);

  const std::vector<double> band = ReplayBandFilter(config, kBandTaps);
  y = Convolve(y, band, kBandTaps / 2);

  const double noise = Rms(y) * std::pow(10.0, -config.noise_snr_db / 20.0);
  for (double &v : y) v += noise * rng.Normal();
  NormalizeLevel(&y);
  return y;
}

SyntheticUtterance RenderUtterance(const SynthConfig &config, int index) {
  std::vector<double> x = RenderSource(config, index);
  const bool spoof = IsSpoofIndex(config, index);
  if (spoof) x = ApplyReplayChannel(config, x, index);
  Trial t;
  t.speaker_id = SyntheticSpeakerId(index / config.utterances_per_speaker);
  t.utterance_id = SyntheticUtteranceId(index);
  t.environment_id = "syn";
  t.attack_id = spoof ? "RA" : kNoAttack;
  t.key = spoof ? TrialKey::kSpoof : TrialKey::kBonafide;
  return {std::move(t), AudioBuffer(std::move(x), config.sample_rate_hz)};
}

std::vector<Trial> GenerateSyntheticCorpus(const SynthConfig &config,
                                           const std::filesystem::path &out_dir) {
  config.Validate();
  const std::filesystem::path wav_dir = out_dir / "wav";
  std::error_code ec;
  std::filesystem::create_directories(wav_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + wav_dir.string() + ": " + ec.message());
  std::vector<Trial> trials;
  for (int i = 0; i < config.NumUtterances(); ++i) {
    SyntheticUtterance u = RenderUtterance(config, i);
    u.trial.audio_path = wav_dir / (u.trial.utterance_id + ".wav");
    WriteWav(u.audio, u.trial.audio_path);
    trials.push_back(std::move(u.trial));
  }
  const std::filesystem::path protocol = out_dir / "protocol.txt";
  std::ofstream os(protocol);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + protocol.string());
  os << RenderProtocol(trials);
  if (!os) Fail(ErrorCode::kIo, "write failed for " + protocol.string());
  return trials;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<size_t>> FoldIndices(size_t n, int k, uint64_t seed) {
  Require(k >= 2, ErrorCode::kInvalidArgument, "need at least 2 folds");
  Require(static_cast<size_t>(k) <= n, ErrorCode::kInvalidArgument,
          "cannot split " + std::to_string(n) + " items into " + std::to_string(k) + " folds");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(&order);
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  const size_t base = n / k, extra = n % k;
  size_t pos = 0;
  for (size_t f = 0; f < folds.size(); ++f) {
    const size_t len = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + len);
    pos += len;
  }
  return folds;
}

std::pair<std::vector<size_t>, std::vector<size_t>> BalancedBipartition(
    const std::vector<TrialKey> &keys, uint64_t seed) {
  std::pair<std::vector<size_t>, std::vector<size_t>> parts;
  Rng rng(seed);
  for (TrialKey key : {TrialKey::kBonafide, TrialKey::kSpoof}) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < keys.size(); ++i)
      if (keys[i] == key) idx.push_back(i);
    Require(idx.size() >= 2, ErrorCode::kInvalidArgument,
            std::string("bipartition needs at least 2 ") + TrialKeyName(key) + " trials");
    rng.Shuffle(&idx);
    const size_t half = (idx.size() + 1) / 2;
    parts.first.insert(parts.first.end(), idx.begin(), idx.begin() + half);
    parts.second.insert(parts.second.end(), idx.begin() + half, idx.end());
  }
  std::sort(parts.first.begin(), parts.first.end());
  std::sort(parts.second.begin(), parts.second.end());
  return parts;
}

}  // namespace spoofguard
