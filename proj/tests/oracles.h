// oracles.h

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

// Independent oracles shared by the unit and acceptance suites: a naive
// windowed correlation for CQT bins, an O(M^2) DCT-II, and brute-force
// metric sweeps that count every candidate threshold directly.

#ifndef SPOOFGUARD_TESTS_ORACLES_H_
#define SPOOFGUARD_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace spoofguard::testing {

/// Naive correlation of the signal with a Hann-windowed complex exponential
/// at `freq`, written out independently of the kernel bank.
inline std::complex<double> NaiveCqtBin(std::span<const double> x, double freq, double q,
                                        int fs, size_t centre) {
  const auto len = static_cast<size_t>(std::ceil(q * fs / freq));
  const auto half = static_cast<long>(len / 2);
  double norm = 0.0;
  for (size_t n = 0; n < len; ++n)
    norm += std::pow(std::sin(std::numbers::pi * (n + 0.5) / len), 2);
  std::complex<double> acc = 0.0;
  for (size_t n = 0; n < len; ++n) {
    const long idx = static_cast<long>(centre) - half + static_cast<long>(n);
    if (idx < 0 || idx >= static_cast<long>(x.size())) continue;
    const double w = std::pow(std::sin(std::numbers::pi * (n + 0.5) / len), 2) / norm;
    const double arg = -2.0 * std::numbers::pi * freq * (static_cast<double>(n) - half) / fs;
    acc += x[static_cast<size_t>(idx)] * w * std::polar(1.0, arg);
  }
  return acc;
}

/// Naive O(M^2) orthonormal DCT-II of one row.
inline std::vector<double> NaiveDct(const std::vector<double> &x, int keep) {
  const auto m = static_cast<double>(x.size());
  std::vector<double> out(static_cast<size_t>(keep));
  for (int k = 0; k < keep; ++k) {
    double acc = 0.0;
    for (size_t n = 0; n < x.size(); ++n)
      acc += x[n] * std::cos(std::numbers::pi / m * (static_cast<double>(n) + 0.5) * k);
    out[static_cast<size_t>(k)] = acc * (k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m));
  }
  return out;
}

struct BrutePoint {
  double threshold, miss, fa;
};

inline std::vector<BrutePoint> BrutePoints(const std::vector<double> &bona,
                                           const std::vector<double> &spoof) {
  std::vector<double> cand;
  for (double s : bona)
    if (std::find(cand.begin(), cand.end(), s) == cand.end()) cand.push_back(s);
  for (double s : spoof)
    if (std::find(cand.begin(), cand.end(), s) == cand.end()) cand.push_back(s);
  std::sort(cand.begin(), cand.end());
  cand.push_back(std::numeric_limits<double>::infinity());
  std::vector<BrutePoint> out;
  for (double t : cand) {
    int miss = 0, fa = 0;
    for (double s : bona) miss += s < t;
    for (double s : spoof) fa += s >= t;
    out.push_back({t, static_cast<double>(miss) / bona.size(),
                   static_cast<double>(fa) / spoof.size()});
  }
  return out;
}

/// Rate where miss first reaches false alarm, interpolated linearly between
/// the bracketing points.
inline double BruteEer(const std::vector<double> &bona, const std::vector<double> &spoof) {
  const auto pts = BrutePoints(bona, spoof);
  for (size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].miss < pts[i].fa) continue;
    if (i == 0 || pts[i].miss == pts[i].fa) return pts[i].miss;
    const auto &a = pts[i - 1], &b = pts[i];
    // Intersect the two segments parametrically.
    const double t = (a.fa - a.miss) / ((b.miss - a.miss) - (b.fa - a.fa));
    return a.miss + t * (b.miss - a.miss);
  }
  return -1.0;
}

inline double BruteMinTdcf(const std::vector<double> &bona, const std::vector<double> &spoof,
                           double c1, double c2) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : BrutePoints(bona, spoof))
    best = std::min(best, (c1 * p.miss + c2 * p.fa) / std::min(c1, c2));
  return best;
}

}  // namespace spoofguard::testing

#endif  // SPOOFGUARD_TESTS_ORACLES_H_
