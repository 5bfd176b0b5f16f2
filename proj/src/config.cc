// config.cc

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

#include "spoofguard/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>> &Config::Defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"sample_rate_hz", "16000"},
      {"cqt.f_min_hz", "62.5"},
      {"cqt.f_max_hz", "8000"},
      {"cqt.bins_per_octave", "24"},
      {"cqt.hop_length", "128"},
      {"cqcc.log_floor", "1e-10"},
      {"cqcc.resample_bins", "256"},
      {"cqcc.num_coeffs", "90"},
      {"ae.bottleneck", "70"},  // 0 disables the autoencoder
      {"ae.lambda", "1e-4"},
      {"ae.learning_rate", "0.05"},
      {"ae.epochs", "30"},
      {"ae.batch_size", "64"},
      {"ae.seed", "1"},
      {"siamese.config", "3"},
      {"siamese.frames", "400"},
      {"siamese.references", "100"},
      {"siamese.dropout", "0.3"},
      {"siamese.kernel", "3"},
      {"siamese.pool_stride", "2"},
      {"siamese.learning_rate", "0.01"},
      {"siamese.momentum", "0.9"},
      {"siamese.epochs", "20"},
      {"siamese.batch_size", "200"},
      {"siamese.seed", "1"},
      {"siamese.score_mode", "vote"},  // vote | mean
      {"tdcf.pi_tar", "0.9405"},
      {"tdcf.pi_non", "0.0095"},
      {"tdcf.pi_spoof", "0.05"},
      {"tdcf.c_miss_cm", "1"},
      {"tdcf.c_fa_cm", "10"},
      {"tdcf.c_miss_asv", "1"},
      {"tdcf.c_fa_asv", "10"},
      {"tdcf.p_miss_asv", "0"},
      {"tdcf.p_fa_asv", "0"},
      {"tdcf.p_miss_spoof_asv", "0"},
      {"synth.num_speakers", "40"},
      {"synth.utterances_per_speaker", "10"},
      {"synth.spoof_fraction", "0.5"},
      {"synth.duration_s", "0.5"},
      {"synth.rir_length", "2400"},
      {"synth.replay_low_hz", "300"},
      {"synth.replay_high_hz", "3400"},
      {"synth.noise_snr_db", "40"},
      {"synth.seed", "1"},
      {"data.protocol", ""},  // single corpus, split by speaker
      {"data.split", "0.5,0.25,0.25"},
      {"data.split_seed", "1"},
      {"data.train_protocol", ""},  // explicit subsets override data.protocol
      {"data.dev_protocol", ""},
      {"data.eval_protocol", ""},
      {"data.audio_dir", ""},  // default: <protocol dir>/wav
      {"data.train_audio_dir", ""},  // per-subset overrides of data.audio_dir
      {"data.dev_audio_dir", ""},
      {"data.eval_audio_dir", ""},
      {"plan.cqcc_dims", "90"},
      {"plan.bottleneck_dims", "70"},  // 0 = no autoencoder
      {"plan.configs", "3"},
      {"plan.fractions", "1.0"},
      {"plan.folds", "5"},
      {"plan.seeds", "1"},
      {"plan.baseline_cnn", "false"},
      {"plan.workers", "1"},
  };
  return table;
}

Config::Config() {
  for (const auto &[k, v] : Defaults()) values_[k] = v;
}

void Config::Set(const std::string &key, const std::string &value) {
  auto it = values_.find(key);
  Require(it != values_.end(), ErrorCode::kParse, "unknown config key '" + key + "'");
  it->second = value;
}

void Config::Load(std::istream &is, const std::string &source) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    Require(eq != std::string::npos, ErrorCode::kParse,
            where + "expected 'key = value', got '" + line + "'");
    const std::string key = Trim(line.substr(0, eq));
    Require(values_.count(key) > 0, ErrorCode::kParse,
            where + "unknown config key '" + key + "'");
    values_[key] = Trim(line.substr(eq + 1));
  }
}

void Config::LoadFile(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kMissingFile, "cannot open config " + path.string());
  Load(is, path.string());
}

void Config::Override(const std::string &assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string::npos, ErrorCode::kParse,
          "override '" + assignment + "' is not key=value");
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

std::string Config::Get(const std::string &key) const {
  auto it = values_.find(key);
  Require(it != values_.end(), ErrorCode::kParse, "unknown config key '" + key + "'");
  return it->second;
}

long Config::GetInt(const std::string &key) const {
  const std::string v = Get(key);
  long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  Require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse,
          "config key '" + key + "': '" + v + "' is not an integer");
  return out;
}

uint64_t Config::GetSeed(const std::string &key) const {
  const std::string v = Get(key);
  uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  Require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse,
          "config key '" + key + "': '" + v + "' is not an unsigned integer");
  return out;
}

double Config::GetReal(const std::string &key) const {
  try {
    return ParseReal(Get(key));
  } catch (const Error &e) {
    throw Error(ErrorCode::kParse, "config key '" + key + "': " + e.what());
  }
}

bool Config::GetBool(const std::string &key) const {
  const std::string v = Get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(ErrorCode::kParse, "config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> Config::GetRealList(const std::string &key) const {
  std::vector<double> out;
  for (const auto &item : SplitList(Get(key))) {
    try {
      out.push_back(ParseReal(item));
    } catch (const Error &e) {
      throw Error(ErrorCode::kParse, "config key '" + key + "': " + e.what());
    }
  }
  return out;
}

std::vector<int> Config::GetIntList(const std::string &key) const {
  std::vector<int> out;
  for (const auto &item : SplitList(Get(key))) {
    int v = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    Require(res.ec == std::errc() && res.ptr == item.data() + item.size(), ErrorCode::kParse,
            "config key '" + key + "': '" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

std::string Config::Render() const {
  std::string out;
  for (const auto &[k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void Config::WriteSnapshot(const std::filesystem::path &path) const {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  os << Render();
}

// ---------------------------------------------------------------------------

CqccConfig CqccConfigFrom(const Config &c) {
  CqccConfig out;
  out.cqt.f_min_hz = c.GetReal("cqt.f_min_hz");
  out.cqt.f_max_hz = c.GetReal("cqt.f_max_hz");
  out.cqt.bins_per_octave = static_cast<int>(c.GetInt("cqt.bins_per_octave"));
  out.cqt.sample_rate_hz = static_cast<int>(c.GetInt("sample_rate_hz"));
  out.cqt.hop_length = static_cast<int>(c.GetInt("cqt.hop_length"));
  out.log_floor = c.GetReal("cqcc.log_floor");
  out.resample_bins = static_cast<int>(c.GetInt("cqcc.resample_bins"));
  out.num_coeffs = static_cast<int>(c.GetInt("cqcc.num_coeffs"));
  out.Validate();
  return out;
}

AeHyper AeHyperFrom(const Config &c) {
  AeHyper h;
  h.lambda = c.GetReal("ae.lambda");
  h.learning_rate = c.GetReal("ae.learning_rate");
  h.epochs = static_cast<int>(c.GetInt("ae.epochs"));
  h.batch_size = static_cast<int>(c.GetInt("ae.batch_size"));
  h.seed = c.GetSeed("ae.seed");
  h.Validate();
  return h;
}

SiameseConfig SiameseConfigFrom(const Config &c, int input_dim) {
  SiameseConfig s = SiameseConfig::Paper(static_cast<int>(c.GetInt("siamese.config")),
                                         static_cast<int>(c.GetInt("siamese.frames")),
                                         input_dim);
  s.dropout = c.GetReal("siamese.dropout");
  s.kernel = static_cast<int>(c.GetInt("siamese.kernel"));
  s.pool_stride = static_cast<int>(c.GetInt("siamese.pool_stride"));
  s.Validate();
  return s;
}

SiameseHyper SiameseHyperFrom(const Config &c) {
  SiameseHyper h;
  h.learning_rate = c.GetReal("siamese.learning_rate");
  h.momentum = c.GetReal("siamese.momentum");
  h.epochs = static_cast<int>(c.GetInt("siamese.epochs"));
  h.batch_size = static_cast<int>(c.GetInt("siamese.batch_size"));
  h.seed = c.GetSeed("siamese.seed");
  h.Validate();
  return h;
}

TdcfParams TdcfParamsFrom(const Config &c) {
  TdcfParams p;
  p.pi_tar = c.GetReal("tdcf.pi_tar");
  p.pi_non = c.GetReal("tdcf.pi_non");
  p.pi_spoof = c.GetReal("tdcf.pi_spoof");
  p.c_miss_cm = c.GetReal("tdcf.c_miss_cm");
  p.c_fa_cm = c.GetReal("tdcf.c_fa_cm");
  p.c_miss_asv = c.GetReal("tdcf.c_miss_asv");
  p.c_fa_asv = c.GetReal("tdcf.c_fa_asv");
  p.p_miss_asv = c.GetReal("tdcf.p_miss_asv");
  p.p_fa_asv = c.GetReal("tdcf.p_fa_asv");
  p.p_miss_spoof_asv = c.GetReal("tdcf.p_miss_spoof_asv");
  p.Validate();
  return p;
}

SynthConfig SynthConfigFrom(const Config &c) {
  SynthConfig s;
  s.num_speakers = static_cast<int>(c.GetInt("synth.num_speakers"));
  s.utterances_per_speaker = static_cast<int>(c.GetInt("synth.utterances_per_speaker"));
  s.spoof_fraction = c.GetReal("synth.spoof_fraction");
  s.duration_s = c.GetReal("synth.duration_s");
  s.sample_rate_hz = static_cast<int>(c.GetInt("sample_rate_hz"));
  s.rir_length = static_cast<int>(c.GetInt("synth.rir_length"));
  s.replay_low_hz = c.GetReal("synth.replay_low_hz");
  s.replay_high_hz = c.GetReal("synth.replay_high_hz");
  s.noise_snr_db = c.GetReal("synth.noise_snr_db");
  s.seed = c.GetSeed("synth.seed");
  s.Validate();
  return s;
}

ScoreMode ScoreModeFrom(const Config &c) {
  const std::string m = c.Get("siamese.score_mode");
  if (m == "vote") return ScoreMode::kVote;
  if (m == "mean") return ScoreMode::kMeanDistance;
  Fail(ErrorCode::kParse, "config key 'siamese.score_mode': '" + m + "' is not vote|mean");
}

}  // namespace spoofguard
