// spoofguard/config.h

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

// Run configuration: line-oriented "key = value" text. Every key has a
// default; unknown keys are rejected. '#' starts a comment.

#ifndef SPOOFGUARD_CONFIG_H_
#define SPOOFGUARD_CONFIG_H_

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "spoofguard/autoencoder.h"
#include "spoofguard/cqcc.h"
#include "spoofguard/dataset.h"
#include "spoofguard/metrics.h"
#include "spoofguard/siamese.h"

namespace spoofguard {

class Config {
 public:
  /// All keys at their default values.
  Config();

  /// Merges `key = value` lines; errors name the source, line and key.
  void Load(std::istream &is, const std::string &source = "<stream>");
  void LoadFile(const std::filesystem::path &path);
  /// Applies a single "key=value" override (command line).
  void Override(const std::string &assignment);
  void Set(const std::string &key, const std::string &value);

  bool Has(const std::string &key) const { return values_.count(key) > 0; }
  std::string Get(const std::string &key) const;
  long GetInt(const std::string &key) const;
  uint64_t GetSeed(const std::string &key) const;
  double GetReal(const std::string &key) const;
  bool GetBool(const std::string &key) const;
  std::vector<double> GetRealList(const std::string &key) const;
  std::vector<int> GetIntList(const std::string &key) const;

  /// Every key with its resolved value, sorted, in loadable form.
  std::string Render() const;
  void WriteSnapshot(const std::filesystem::path &path) const;

  static const std::vector<std::pair<std::string, std::string>> &Defaults();

 private:
  std::map<std::string, std::string> values_;
};

CqccConfig CqccConfigFrom(const Config &c);
AeHyper AeHyperFrom(const Config &c);
SiameseConfig SiameseConfigFrom(const Config &c, int input_dim);
SiameseHyper SiameseHyperFrom(const Config &c);
TdcfParams TdcfParamsFrom(const Config &c);
SynthConfig SynthConfigFrom(const Config &c);
ScoreMode ScoreModeFrom(const Config &c);

}  // namespace spoofguard

#endif  // SPOOFGUARD_CONFIG_H_
