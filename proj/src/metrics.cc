// metrics.cc

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

#include "spoofguard/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "spoofguard/matrix_io.h"

namespace spoofguard {

const char *TrialKeyName(TrialKey key) {
  return key == TrialKey::kBonafide ? "bonafide" : "spoof";
}

TrialKey ParseTrialKey(const std::string &token) {
  if (token == "bonafide") return TrialKey::kBonafide;
  if (token == "spoof") return TrialKey::kSpoof;
  Fail(ErrorCode::kParse, "unknown key '" + token + "'");
}

void ScoreSet::Add(std::string trial_id, TrialKey key, double score) {
  Require(std::isfinite(score), ErrorCode::kNumerical,
          "non-finite score for trial " + trial_id);
  records_.push_back({std::move(trial_id), key, score});
}

size_t ScoreSet::CountOf(TrialKey key) const {
  return static_cast<size_t>(std::count_if(records_.begin(), records_.end(),
                                           [key](const ScoreRecord &r) { return r.key == key; }));
}

std::vector<double> ScoreSet::ScoresOf(TrialKey key) const {
  std::vector<double> out;
  for (const auto &r : records_)
    if (r.key == key) out.push_back(r.score);
  return out;
}

void TdcfParams::Validate() const {
  Require(pi_tar > 0.0 && pi_non > 0.0 && pi_spoof > 0.0, ErrorCode::kInvalidArgument,
          "t-DCF priors must be positive");
  Require(std::abs(pi_tar + pi_non + pi_spoof - 1.0) <= 1e-12, ErrorCode::kInvalidArgument,
          "t-DCF priors must sum to 1");
  Require(c_miss_cm > 0.0 && c_fa_cm > 0.0 && c_miss_asv > 0.0 && c_fa_asv > 0.0,
          ErrorCode::kInvalidArgument, "t-DCF costs must be positive");
  for (double p : {p_miss_asv, p_fa_asv, p_miss_spoof_asv})
    Require(p >= 0.0 && p <= 1.0, ErrorCode::kInvalidArgument,
            "ASV error rates must lie in [0, 1]");
}

double TdcfParams::C1() const {
  return pi_tar * (c_miss_cm - c_miss_asv * p_miss_asv) - pi_non * c_fa_asv * p_fa_asv;
}

double TdcfParams::C2() const { return c_fa_cm * pi_spoof * (1.0 - p_miss_spoof_asv); }

std::vector<OperatingPoint> SweepThresholds(const ScoreSet &scores) {
  std::vector<double> bona = scores.ScoresOf(TrialKey::kBonafide);
  std::vector<double> spoof = scores.ScoresOf(TrialKey::kSpoof);
  Require(!bona.empty() && !spoof.empty(), ErrorCode::kInvalidArgument,
          "metrics need at least one bona fide and one spoof trial");
  std::sort(bona.begin(), bona.end());
  std::sort(spoof.begin(), spoof.end());
  std::vector<double> thresholds;
  thresholds.reserve(bona.size() + spoof.size());
  std::merge(bona.begin(), bona.end(), spoof.begin(), spoof.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double nb = static_cast<double>(bona.size());
  const double ns = static_cast<double>(spoof.size());
  std::vector<OperatingPoint> points;
  points.reserve(thresholds.size() + 1);
  for (double s : thresholds) {
    const auto below_b = std::lower_bound(bona.begin(), bona.end(), s) - bona.begin();
    const auto below_s = std::lower_bound(spoof.begin(), spoof.end(), s) - spoof.begin();
    points.push_back({s, static_cast<double>(below_b) / nb,
                      static_cast<double>(static_cast<long>(spoof.size()) - below_s) / ns});
  }
  points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return points;
}

EerResult ComputeEer(const ScoreSet &scores) {
  const auto points = SweepThresholds(scores);
  for (size_t i = 0; i < points.size(); ++i) {
    const OperatingPoint &p = points[i];
    if (p.p_miss < p.p_fa) continue;
    if (p.p_miss == p.p_fa || i == 0) return {p.p_miss, p.threshold};
    const OperatingPoint &q = points[i - 1];
    // miss(t) = q.m + t dm, fa(t) = q.f + t df, solve for equality.
    const double dm = p.p_miss - q.p_miss;
    const double df = p.p_fa - q.p_fa;
    const double t = (q.p_fa - q.p_miss) / (dm - df);
    return {q.p_miss + t * dm, p.threshold};
  }
  Fail(ErrorCode::kNumerical, "threshold sweep has no crossing");
}

std::vector<double> TdcfCurve(const std::vector<OperatingPoint> &points,
                              const TdcfParams &params) {
  const double c1 = params.C1(), c2 = params.C2();
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto &p : points) out.push_back(c1 * p.p_miss + c2 * p.p_fa);
  return out;
}

TdcfResult ComputeMinTdcf(const ScoreSet &scores, const TdcfParams &params) {
  params.Validate();
  const double c1 = params.C1(), c2 = params.C2();
  Require(c1 > 0.0 && c2 > 0.0, ErrorCode::kInvalidArgument,
          "degenerate ASV operating point: C1 and C2 must be positive");
  const auto points = SweepThresholds(scores);
  const auto curve = TdcfCurve(points, params);
  const double norm = std::min(c1, c2);
  TdcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (size_t i = 0; i < points.size(); ++i) {
    const double v = curve[i] / norm;
    if (v < best.min_normalized) best = {v, points[i].threshold};
  }
  return best;
}

void WriteDetCurve(const ScoreSet &scores, const TdcfParams &params, std::ostream &os) {
  const auto points = SweepThresholds(scores);
  const auto curve = TdcfCurve(points, params);
  for (size_t i = 0; i < points.size(); ++i) {
    os << (std::isinf(points[i].threshold) ? std::string("inf")
                                           : FormatReal(points[i].threshold, kFeatureDigits))
       << ' ' << FormatReal(points[i].p_miss, kFeatureDigits) << ' '
       << FormatReal(points[i].p_fa, kFeatureDigits) << ' '
       << FormatReal(curve[i], kFeatureDigits) << '\n';
  }
}

std::string FormatScore(double score) {
  Require(std::isfinite(score), ErrorCode::kNumerical, "cannot format a non-finite score");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

void WriteScores(const ScoreSet &scores, std::ostream &os) {
  for (const auto &r : scores.records())
    os << r.trial_id << ' ' << TrialKeyName(r.key) << ' ' << FormatScore(r.score) << '\n';
}

void WriteScores(const ScoreSet &scores, const std::filesystem::path &path) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteScores(scores, os);
  if (!os) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

ScoreSet ReadScores(std::istream &is, const std::string &source) {
  ScoreSet set;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> cols;
    for (std::string tok; ls >> tok;) cols.push_back(tok);
    if (cols.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    Require(cols.size() == 3, ErrorCode::kParse,
            where + "expected 3 columns, found " + std::to_string(cols.size()));
    try {
      set.Add(cols[0], ParseTrialKey(cols[1]), ParseReal(cols[2]));
    } catch (const Error &e) {
      throw Error(ErrorCode::kParse, where + e.what());
    }
  }
  return set;
}

ScoreSet ReadScores(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  return ReadScores(is, path.string());
}

MetricReport Evaluate(const std::string &system, const ScoreSet &scores,
                      const TdcfParams &params) {
  return {system, ComputeEer(scores).eer, ComputeMinTdcf(scores, params).min_normalized};
}

std::string FormatReport(const MetricReport &report) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), " %.2f %.4f", 100.0 * report.eer, report.min_tdcf);
  return report.system + buf;
}

}  // namespace spoofguard
