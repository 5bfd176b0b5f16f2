// spoofguard/metrics.h

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

// Countermeasure scoring: equal error rate and minimum normalized tandem
// detection cost. Scores follow the "higher = more bona fide" convention.
//
// Operating points are taken at every distinct score s plus s = +inf:
//   P_miss(s) = #{bona fide < s} / #bona fide
//   P_fa(s)   = #{spoof >= s} / #spoof

#ifndef SPOOFGUARD_METRICS_H_
#define SPOOFGUARD_METRICS_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "spoofguard/base.h"

namespace spoofguard {

enum class TrialKey { kBonafide, kSpoof };

const char *TrialKeyName(TrialKey key);
TrialKey ParseTrialKey(const std::string &token);

struct ScoreRecord {
  std::string trial_id;
  TrialKey key;
  double score;  // higher = more bona fide
};

class ScoreSet {
 public:
  void Add(std::string trial_id, TrialKey key, double score);
  const std::vector<ScoreRecord> &records() const { return records_; }
  size_t size() const { return records_.size(); }
  size_t CountOf(TrialKey key) const;
  std::vector<double> ScoresOf(TrialKey key) const;

 private:
  std::vector<ScoreRecord> records_;
};

/// Converts a vote fraction (higher = spoof) into the bona fide convention.
inline double VoteToScore(double vote) { return -vote + 0.0; }

struct TdcfParams {
  double pi_tar = 0.9405;
  double pi_non = 0.0095;
  double pi_spoof = 0.05;
  double c_miss_cm = 1.0;
  double c_fa_cm = 10.0;
  double c_miss_asv = 1.0;
  double c_fa_asv = 10.0;
  double p_miss_asv = 0.0;
  double p_fa_asv = 0.0;
  double p_miss_spoof_asv = 0.0;

  void Validate() const;
  double C1() const;
  double C2() const;
};

struct OperatingPoint {
  double threshold;  // +inf for the reject-all point
  double p_miss;
  double p_fa;
};

/// All operating points in increasing threshold order (distinct scores, then
/// +inf). Requires both keys present and finite scores.
std::vector<OperatingPoint> SweepThresholds(const ScoreSet &scores);

struct EerResult {
  double eer;
  double threshold;
};

/// First operating point with P_miss >= P_fa; when the rates do not meet
/// exactly the crossing is interpolated linearly from the previous point.
EerResult ComputeEer(const ScoreSet &scores);

struct TdcfResult {
  double min_normalized;
  double threshold;
};

TdcfResult ComputeMinTdcf(const ScoreSet &scores, const TdcfParams &params);

/// Unnormalized t-DCF at each operating point, for plotting.
std::vector<double> TdcfCurve(const std::vector<OperatingPoint> &points,
                              const TdcfParams &params);

/// One "<threshold> <p_miss> <p_fa> <tdcf>" line per operating point.
void WriteDetCurve(const ScoreSet &scores, const TdcfParams &params, std::ostream &os);

// Score files: "<trial_id> <bonafide|spoof> <score>" with 6 decimals.
std::string FormatScore(double score);
void WriteScores(const ScoreSet &scores, std::ostream &os);
void WriteScores(const ScoreSet &scores, const std::filesystem::path &path);
ScoreSet ReadScores(std::istream &is, const std::string &source = "<stream>");
ScoreSet ReadScores(const std::filesystem::path &path);

struct MetricReport {
  std::string system;
  double eer;
  double min_tdcf;
};

MetricReport Evaluate(const std::string &system, const ScoreSet &scores,
                      const TdcfParams &params);
/// "<system> <EER%> <min-tDCF>", EER in percent with 2 decimals and
/// t-DCF with 4.
std::string FormatReport(const MetricReport &report);

}  // namespace spoofguard

#endif  // SPOOFGUARD_METRICS_H_
