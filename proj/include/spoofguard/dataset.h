// spoofguard/dataset.h

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

// Trial lists in the five-column ASVspoof protocol layout
//
//   <speaker> <utterance> <environment> <attack> <bonafide|spoof>
//
// plus fold/bipartition helpers and a synthetic replay corpus. A synthetic
// spoof is its bona fide source passed through a simulated loudspeaker and
// room: reverberation, band-limiting and additive noise.

#ifndef SPOOFGUARD_DATASET_H_
#define SPOOFGUARD_DATASET_H_

#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "spoofguard/audio_io.h"
#include "spoofguard/base.h"
#include "spoofguard/metrics.h"

namespace spoofguard {

inline constexpr const char *kNoAttack = "-";

struct Trial {
  std::string speaker_id;
  std::string utterance_id;
  std::string environment_id;
  std::string attack_id;
  TrialKey key = TrialKey::kBonafide;
  std::filesystem::path audio_path;  // empty when no audio directory was given

  bool operator==(const Trial &o) const {
    return speaker_id == o.speaker_id && utterance_id == o.utterance_id &&
           environment_id == o.environment_id && attack_id == o.attack_id && key == o.key;
  }
};

/// Errors name the offending line. When `audio_dir` is non-empty each trial's
/// audio path is set to <audio_dir>/<utterance>.wav.
std::vector<Trial> ParseProtocol(std::istream &is, const std::string &source = "<stream>",
                                 const std::filesystem::path &audio_dir = {});
std::vector<Trial> ParseProtocolFile(const std::filesystem::path &path,
                                     const std::filesystem::path &audio_dir = {});
std::string RenderProtocol(const std::vector<Trial> &trials);

struct KeyCounts {
  size_t bonafide = 0;
  size_t spoof = 0;
};
KeyCounts CountKeys(const std::vector<Trial> &trials);

// ---------------------------------------------------------------------------

struct SynthConfig {
  int num_speakers = 40;
  int utterances_per_speaker = 10;
  double spoof_fraction = 0.5;
  double duration_s = 0.5;
  int sample_rate_hz = 16000;
  int rir_length = 2400;         // samples
  double replay_low_hz = 300.0;  // loudspeaker pass band
  double replay_high_hz = 3400.0;
  double noise_snr_db = 40.0;
  uint64_t seed = 1;

  void Validate() const;
  int NumUtterances() const { return num_speakers * utterances_per_speaker; }
  size_t NumSamples() const;
};

/// True when global utterance `index` is a spoof. Spoofs are spread evenly so
/// that any prefix holds round(fraction * n) of them.
bool IsSpoofIndex(const SynthConfig &config, int index);

std::string SyntheticSpeakerId(int speaker);
std::string SyntheticUtteranceId(int index);

/// Bona fide rendering of utterance `index` (speaker = index / per_speaker).
std::vector<double> RenderSource(const SynthConfig &config, int index);
/// Loudspeaker + room channel applied to `source`, seeded per utterance.
std::vector<double> ApplyReplayChannel(const SynthConfig &config,
                                       const std::vector<double> &source, int index);
/// Windowed-sinc (Blackman) band-pass taps for the replay band.
std::vector<double> ReplayBandFilter(const SynthConfig &config, int num_taps);

struct SyntheticUtterance {
  Trial trial;
  AudioBuffer audio;
};

SyntheticUtterance RenderUtterance(const SynthConfig &config, int index);

/// Writes <out_dir>/wav/<utterance>.wav and <out_dir>/protocol.txt; returns
/// the trial list with audio paths set.
std::vector<Trial> GenerateSyntheticCorpus(const SynthConfig &config,
                                           const std::filesystem::path &out_dir);

// ---------------------------------------------------------------------------

/// Seeded shuffle then contiguous partition into k folds; the first n mod k
/// folds hold one extra item. Returns item indices.
std::vector<std::vector<size_t>> FoldIndices(size_t n, int k, uint64_t seed);

template <class T>
std::vector<std::vector<T>> SplitFolds(const std::vector<T> &items, int k, uint64_t seed) {
  std::vector<std::vector<T>> folds;
  for (const auto &idx : FoldIndices(items.size(), k, seed)) {
    folds.emplace_back();
    for (size_t i : idx) folds.back().push_back(items[i]);
  }
  return folds;
}

/// Per class, a seeded half split; an odd extra item goes to part A.
/// Returns index lists (part A, part B).
std::pair<std::vector<size_t>, std::vector<size_t>> BalancedBipartition(
    const std::vector<TrialKey> &keys, uint64_t seed);

std::vector<TrialKey> KeysOf(const std::vector<Trial> &trials);

}  // namespace spoofguard

#endif  // SPOOFGUARD_DATASET_H_
