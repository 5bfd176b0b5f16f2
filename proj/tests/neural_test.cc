// neural_test.cc

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

#include "doctest.h"
#include "gradient_check.h"
#include "spoofguard/neural.h"
#include "test_util.h"

namespace spoofguard {
namespace {

using testing::ErrorOf;

Tensor3 RandomTensor(Rng *rng, int c, int h, int w) {
  Tensor3 t(c, h, w);
  for (double &v : t.data()) v = rng->Uniform(-1.0, 1.0);
  return t;
}

/// Direct summation with zero padding of kernel / 2.
Tensor3 ConvOracle(const Tensor3 &x, const ConvParams &p) {
  const int pad = p.kernel / 2;
  const int oh = (x.height() + 2 * pad - p.kernel) / p.stride + 1;
  const int ow = (x.width() + 2 * pad - p.kernel) / p.stride + 1;
  Tensor3 y(p.filters(), oh, ow);
  for (int f = 0; f < p.filters(); ++f)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j) {
        double acc = p.bias[f];
        for (int c = 0; c < x.channels(); ++c)
          for (int u = 0; u < p.kernel; ++u)
            for (int v = 0; v < p.kernel; ++v) {
              const int r = i * p.stride + u - pad, s = j * p.stride + v - pad;
              if (r < 0 || s < 0 || r >= x.height() || s >= x.width()) continue;
              acc += p.weights(f, (c * p.kernel + u) * p.kernel + v) * x.at(c, r, s);
            }
        y.at(f, i, j) = acc;
      }
  return y;
}

double MaxDiff(const Tensor3 &a, const Tensor3 &b) {
  REQUIRE(a.SameShape(b));
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

TEST_CASE("convolution") {
  Rng rng(1);
  const Tensor3 x = RandomTensor(&rng, 1, 5, 4);
  ConvParams id = ConvParams::Zeros(1, 1, 1);
  id.weights(0, 0) = 1.0;
  CHECK(MaxDiff(ConvForward(x, id), x) == 0.0);

  ConvParams ones = ConvParams::Zeros(1, 1, 3);
  ones.weights.setOnes();
  const Tensor3 y = ConvForward(Tensor3(1, 6, 6, 1.0), ones);
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 5; ++j) CHECK(y.at(0, i, j) == 9.0);
  CHECK(y.at(0, 0, 0) == 4.0);

  for (int trial = 0; trial < 10; ++trial) {
    const int c = 1 + static_cast<int>(rng.Below(3)), k = 1 + 2 * static_cast<int>(rng.Below(2));
    ConvParams p = ConvParams::Zeros(c, 2 + static_cast<int>(rng.Below(3)), k,
                                     1 + static_cast<int>(rng.Below(2)));
    p.weights = testing::RandomMatrix(&rng, p.weights.rows(), p.weights.cols());
    p.bias = testing::RandomVector(&rng, p.bias.size());
    const Tensor3 in = RandomTensor(&rng, c, 7, 6);
    REQUIRE(MaxDiff(ConvForward(in, p), ConvOracle(in, p)) < 1e-9);
  }
}

TEST_CASE("pooling") {
  const PoolSpec max2{PoolKind::kMax, 2, 2}, avg2{PoolKind::kAvg, 2, 2};
  Tensor3 w(1, 2, 2);
  w.at(0, 0, 0) = 1;
  w.at(0, 0, 1) = 2;
  w.at(0, 1, 0) = 3;
  w.at(0, 1, 1) = 4;
  CHECK(PoolForward(w, max2).at(0, 0, 0) == 4.0);
  CHECK(PoolForward(w, avg2).at(0, 0, 0) == 2.5);
  const Tensor3 c(2, 7, 7, -1.25);
  for (const auto &spec : {PoolSpec{PoolKind::kMax, 3, 2}, PoolSpec{PoolKind::kAvg, 3, 2}})
  {
    const Tensor3 pooled = PoolForward(c, spec);
    for (double v : pooled.data()) CHECK(v == -1.25);
  }

  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor3 x = RandomTensor(&rng, 2, 9, 8);
    const PoolSpec ms{PoolKind::kMax, 3, 2}, as{PoolKind::kAvg, 3, 2};
    const Tensor3 m = PoolForward(x, ms), a = PoolForward(x, as);
    REQUIRE(m.height() == 4);
    REQUIRE(m.width() == 3);
    for (int ch = 0; ch < 2; ++ch)
      for (int i = 0; i < m.height(); ++i)
        for (int j = 0; j < m.width(); ++j) {
          double mx = -1e300, sum = 0.0;
          for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v) {
              mx = std::max(mx, x.at(ch, 2 * i + u, 2 * j + v));
              sum += x.at(ch, 2 * i + u, 2 * j + v);
            }
          REQUIRE(m.at(ch, i, j) == mx);
          REQUIRE(a.at(ch, i, j) == doctest::Approx(sum / 9.0).epsilon(1e-14));
          REQUIRE(a.at(ch, i, j) <= m.at(ch, i, j));
        }
  }
}

TEST_CASE("max-feature-map") {
  Rng rng(3);
  const Tensor3 half = RandomTensor(&rng, 2, 3, 3);
  Tensor3 dup(4, 3, 3);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dup.at(c, i, j) = half.at(c % 2, i, j);
  CHECK(MaxDiff(MfmForward(dup), half) == 0.0);

  Tensor3 split(2, 2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) split.at(1, i, j) = 1.0;
  const Tensor3 ones = MfmForward(split);
  for (double v : ones.data()) CHECK(v == 1.0);

  const Tensor3 x = RandomTensor(&rng, 6, 4, 5);
  const Tensor3 y = MfmForward(x);
  REQUIRE(y.channels() == 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 5; ++j) REQUIRE(y.at(c, i, j) == std::max(x.at(c, i, j), x.at(c + 3, i, j)));

  // Monotone: raising any input entry never lowers an output.
  for (int trial = 0; trial < 50; ++trial) {
    Tensor3 z = x;
    z.data()[rng.Below(z.size())] += rng.Uniform(0.0, 2.0);
    const Tensor3 yz = MfmForward(z);
    for (size_t i = 0; i < y.size(); ++i) REQUIRE(yz.data()[i] >= y.data()[i]);
  }
  const Vector v = testing::RandomVector(&rng, 8);
  const Vector mv = MfmForward(v);
  for (int i = 0; i < 4; ++i) CHECK(mv[i] == std::max(v[i], v[i + 4]));
  CHECK(ErrorOf([&] { MfmForward(Tensor3(3, 2, 2)); }).has_value());
}

TEST_CASE("highway layer") {
  Rng rng(4);
  HighwayParams p = HighwayParams::Zeros(5);
  p.w_h = testing::RandomMatrix(&rng, 5, 5);
  p.b_h = testing::RandomVector(&rng, 5);
  const Vector x = testing::RandomVector(&rng, 5);
  p.b_t.setConstant(-800.0);
  CHECK((HighwayForward(p, x) - x).cwiseAbs().maxCoeff() < 1e-12);
  p.b_t.setConstant(800.0);
  const Vector h = (p.w_h * x + p.b_h).cwiseMax(0.0);
  CHECK((HighwayForward(p, x) - h).cwiseAbs().maxCoeff() < 1e-12);

  for (int trial = 0; trial < 10; ++trial) {
    p.w_t = testing::RandomMatrix(&rng, 5, 5);
    p.b_t = testing::RandomVector(&rng, 5);
    const Vector y = HighwayForward(p, x);
    for (int i = 0; i < 5; ++i) {
      double hp = p.b_h[i], tp = p.b_t[i];
      for (int j = 0; j < 5; ++j) {
        hp += p.w_h(i, j) * x[j];
        tp += p.w_t(i, j) * x[j];
      }
      const double t = 1.0 / (1.0 + std::exp(-tp));
      REQUIRE(y[i] == doctest::Approx(std::max(hp, 0.0) * t + x[i] * (1.0 - t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("softmax") {
  const Vector eq = Softmax(Vector::Constant(2, 0.3));
  CHECK(eq[0] == 0.5);
  CHECK(eq[1] == 0.5);
  Vector l(2);
  l << 0.0, std::log(3.0);
  const Vector p = Softmax(l);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector z = testing::RandomVector(&rng, 2 + static_cast<Eigen::Index>(rng.Below(5)), -10.0, 10.0);
    const Vector s = Softmax(z);
    REQUIRE(std::abs(s.sum() - 1.0) < 1e-12);
    REQUIRE((s.array() > 0.0).all());
    REQUIRE((s.array() < 1.0).all());
    const Vector shifted = Softmax((z.array() + rng.Uniform(-50.0, 50.0)).matrix());
    REQUIRE((shifted - s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("binary cross-entropy") {
  const double one = 1.0, half = 0.5;
  const int t1 = 1, t0 = 0;
  CHECK(CrossEntropy({&one, 1}, {&t1, 1}) < 1e-11);
  CHECK(CrossEntropy({&half, 1}, {&t1, 1}) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(CrossEntropy({&half, 1}, {&t0, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  Rng rng(6);
  std::vector<double> f(50);
  std::vector<int> t(50);
  double oracle = 0.0;
  for (size_t i = 0; i < 50; ++i) {
    f[i] = rng.Uniform(0.01, 0.99);
    t[i] = static_cast<int>(rng.Below(2));
    oracle += t[i] ? -std::log(f[i]) : -std::log(1.0 - f[i]);
  }
  CHECK(CrossEntropy(f, t) == doctest::Approx(oracle / 50.0).epsilon(1e-14));
  const int bad = 2;
  CHECK(ErrorOf([&] { CrossEntropy({&half, 1}, {&bad, 1}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("dropout") {
  Rng rng(7);
  const Vector x = testing::RandomVector(&rng, 1000);
  CHECK(Dropout(x, 0.0, Mode::kTrain, &rng) == x);
  CHECK(Dropout(x, 0.7, Mode::kEval, nullptr) == x);

  const int n = 100000;
  const double p = 0.3;
  const Vector y = Dropout(Vector::Ones(n), p, Mode::kTrain, 12345);
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    if (y[i] == 0.0)
      ++zeros;
    else
      REQUIRE(y[i] == doctest::Approx(1.0 / (1.0 - p)).epsilon(1e-15));
  }
  const double sigma = std::sqrt(n * p * (1.0 - p));
  CHECK(std::abs(zeros - n * p) <= 3.0 * sigma);
  CHECK(Dropout(Vector::Ones(n), p, Mode::kTrain, 12345) == y);
}

TEST_CASE("sgd") {
  std::vector<double> theta{2.0}, g{0.25};
  SgdStep(theta, g, 1.0);
  CHECK(theta[0] == 1.75);
  std::vector<double> z{0.0, 0.0}, w{1.0, -3.0};
  SgdStep(w, z, 0.5);
  CHECK(w == std::vector<double>{1.0, -3.0});

  std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
  std::vector<double> ga{0.5, -0.25};
  SgdOptimizer plain(0.1, 0.0);
  for (int i = 0; i < 3; ++i) {
    plain.Step({std::span<double>(a)}, {std::span<double>(ga)});
    SgdStep(b, ga, 0.1);
  }
  CHECK(a == b);
  // Heavy ball: v1 = g, v2 = 0.9 g + g.
  std::vector<double> c{0.0};
  std::vector<double> gc{1.0};
  SgdOptimizer heavy(0.1, 0.9);
  heavy.Step({std::span<double>(c)}, {std::span<double>(gc)});
  heavy.Step({std::span<double>(c)}, {std::span<double>(gc)});
  CHECK(c[0] == doctest::Approx(-0.1 - 0.19).epsilon(1e-15));
}

TEST_CASE("network gradient matches central differences") {
  for (PoolKind kind : {PoolKind::kMax, PoolKind::kAvg}) {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = testing::CheckNetworkGradient(seed, kind);
      CAPTURE(seed);
      CAPTURE(PoolKindName(kind));
      CHECK(r.margin >= 1e-3);
      CHECK(r.entries > 50);
      CHECK(r.max_relative_error < 1e-3);
    }
  }
}

TEST_CASE("leg shapes and parameter count") {
  LegSpec s;
  s.input_frames = 32;
  s.input_dim = 70;
  s.conv_filters = {160, 200, 100};
  s.pool = {PoolKind::kMax, 3, 2};
  s.hidden = 300;
  const auto shapes = s.BlockShapes();
  REQUIRE(shapes.size() == 3);
  CHECK(shapes[0] == std::array<int, 3>{80, 15, 34});
  CHECK(shapes[1] == std::array<int, 3>{100, 7, 16});
  CHECK(shapes[2] == std::array<int, 3>{50, 3, 7});
  CHECK(s.FlatSize() == 50 * 3 * 7);
  const LegParams p = LegParams::Zeros(s);
  const size_t expected = (160 * 9 + 160) + (200 * 80 * 9 + 200) + (100 * 100 * 9 + 100) +
                          (600 * 1050 + 600);
  CHECK(p.NumParameters() == expected);
  LegSpec tiny = s;
  tiny.input_frames = 4;
  CHECK(ErrorOf([&] { tiny.Validate(); }) == ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace spoofguard
