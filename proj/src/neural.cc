// neural.cc

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

#include "spoofguard/neural.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace spoofguard {

namespace {

// Unfolds every receptive field into a column: rows are (c, i, j) kernel
// taps, columns are output positions.
RowMatrix Im2Col(const Tensor3 &in, const ConvParams &p, int out_h, int out_w) {
  const int k = p.kernel, s = p.stride, pad = p.padding();
  const int h = in.height(), w = in.width();
  RowMatrix cols(static_cast<Eigen::Index>(in.channels()) * k * k,
                 static_cast<Eigen::Index>(out_h) * out_w);
  for (int c = 0; c < in.channels(); ++c) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        double *dst = cols.row((c * k + i) * k + j).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * s + i - pad;
          double *row = dst + static_cast<size_t>(oh) * out_w;
          if (ih < 0 || ih >= h) {
            std::fill(row, row + out_w, 0.0);
            continue;
          }
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * s + j - pad;
            row[ow] = (iw >= 0 && iw < w) ? in.at(c, ih, iw) : 0.0;
          }
        }
      }
    }
  }
  return cols;
}

void Col2ImAdd(const RowMatrix &cols, const ConvParams &p, int out_h, int out_w,
               Tensor3 *out) {
  const int k = p.kernel, s = p.stride, pad = p.padding();
  const int h = out->height(), w = out->width();
  for (int c = 0; c < out->channels(); ++c) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double *src = cols.row((c * k + i) * k + j).data();
        for (int oh = 0; oh < out_h; ++oh) {
          const int ih = oh * s + i - pad;
          if (ih < 0 || ih >= h) continue;
          for (int ow = 0; ow < out_w; ++ow) {
            const int iw = ow * s + j - pad;
            if (iw >= 0 && iw < w)
              out->at(c, ih, iw) += src[static_cast<size_t>(oh) * out_w + ow];
          }
        }
      }
    }
  }
}

double SigmoidScalar(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void RequireMatching(bool ok, const std::string &what) {
  Require(ok, ErrorCode::kShapeMismatch, what);
}

}  // namespace

Tensor3::Tensor3(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  Require(channels > 0 && height > 0 && width > 0, ErrorCode::kInvalidArgument,
          "tensor extents must be positive");
  data_.assign(static_cast<size_t>(channels) * height * width, fill);
}

const char *PoolKindName(PoolKind kind) {
  return kind == PoolKind::kMax ? "max" : "avg";
}

PoolKind ParsePoolKind(const std::string &name) {
  if (name == "max") return PoolKind::kMax;
  if (name == "avg") return PoolKind::kAvg;
  Fail(ErrorCode::kParse, "unknown pooling kind '" + name + "'");
}

// ---------------------------------------------------------------------------

ConvParams ConvParams::Zeros(int in_channels, int filters, int kernel, int stride) {
  Require(in_channels > 0 && filters > 0 && kernel > 0 && stride > 0,
          ErrorCode::kInvalidArgument, "conv parameters must be positive");
  ConvParams p;
  p.weights = RowMatrix::Zero(filters, static_cast<Eigen::Index>(in_channels) * kernel * kernel);
  p.bias = Vector::Zero(filters);
  p.in_channels = in_channels;
  p.kernel = kernel;
  p.stride = stride;
  return p;
}

Tensor3 ConvForward(const Tensor3 &input, const ConvParams &params) {
  RequireMatching(input.channels() == params.in_channels,
                  "conv: input has " + std::to_string(input.channels()) +
                      " channels, kernel expects " + std::to_string(params.in_channels));
  RequireMatching(params.weights.cols() ==
                      static_cast<Eigen::Index>(params.in_channels) * params.kernel * params.kernel,
                  "conv: weight matrix width does not match kernel");
  const int out_h = params.OutputExtent(input.height());
  const int out_w = params.OutputExtent(input.width());
  RequireMatching(out_h > 0 && out_w > 0, "conv: kernel does not fit the padded input");
  const RowMatrix cols = Im2Col(input, params, out_h, out_w);
  Tensor3 out(params.filters(), out_h, out_w);
  auto m = out.AsMatrix();
  m.noalias() = params.weights * cols;
  m.colwise() += params.bias;
  return out;
}

Tensor3 ConvBackward(const Tensor3 &input, const ConvParams &params,
                     const Tensor3 &d_output, ConvParams *grad) {
  const int out_h = params.OutputExtent(input.height());
  const int out_w = params.OutputExtent(input.width());
  RequireMatching(d_output.channels() == params.filters() && d_output.height() == out_h &&
                      d_output.width() == out_w,
                  "conv backward: gradient shape does not match forward output");
  const RowMatrix cols = Im2Col(input, params, out_h, out_w);
  const auto d_out = d_output.AsMatrix();
  grad->weights.noalias() += d_out * cols.transpose();
  grad->bias += d_out.rowwise().sum();
  const RowMatrix d_cols = params.weights.transpose() * d_out;
  Tensor3 d_input(input.channels(), input.height(), input.width());
  Col2ImAdd(d_cols, params, out_h, out_w, &d_input);
  return d_input;
}

// ---------------------------------------------------------------------------

Tensor3 PoolForward(const Tensor3 &input, const PoolSpec &spec,
                    std::vector<int> *argmax) {
  Require(spec.extent > 0 && spec.stride > 0, ErrorCode::kInvalidArgument,
          "pool extent and stride must be positive");
  Require(spec.extent <= input.height() && spec.extent <= input.width(),
          ErrorCode::kInvalidArgument,
          "pool extent " + std::to_string(spec.extent) + " larger than input " +
              std::to_string(input.height()) + "x" + std::to_string(input.width()));
  const int out_h = spec.OutputExtent(input.height());
  const int out_w = spec.OutputExtent(input.width());
  Tensor3 out(input.channels(), out_h, out_w);
  if (argmax) argmax->assign(out.size(), 0);
  const double inv_area = 1.0 / (spec.extent * spec.extent);
  const auto in = input.data();
  size_t o = 0;
  for (int c = 0; c < input.channels(); ++c) {
    for (int oh = 0; oh < out_h; ++oh) {
      for (int ow = 0; ow < out_w; ++ow, ++o) {
        const int h0 = oh * spec.stride, w0 = ow * spec.stride;
        if (spec.kind == PoolKind::kMax) {
          int best = -1;
          double best_val = 0.0;
          for (int i = 0; i < spec.extent; ++i) {
            for (int j = 0; j < spec.extent; ++j) {
              const int idx = (c * input.height() + h0 + i) * input.width() + w0 + j;
              if (best < 0 || in[idx] > best_val) {
                best = idx;
                best_val = in[idx];
              }
            }
          }
          out.data()[o] = best_val;
          if (argmax) (*argmax)[o] = best;
        } else {
          double sum = 0.0;
          for (int i = 0; i < spec.extent; ++i)
            for (int j = 0; j < spec.extent; ++j)
              sum += input.at(c, h0 + i, w0 + j);
          out.data()[o] = sum * inv_area;
        }
      }
    }
  }
  return out;
}

Tensor3 PoolBackward(const Tensor3 &input_shape, const PoolSpec &spec,
                     const Tensor3 &d_output, const std::vector<int> &argmax) {
  Tensor3 d_input(input_shape.channels(), input_shape.height(), input_shape.width());
  const int out_h = spec.OutputExtent(input_shape.height());
  const int out_w = spec.OutputExtent(input_shape.width());
  RequireMatching(d_output.channels() == input_shape.channels() &&
                      d_output.height() == out_h && d_output.width() == out_w,
                  "pool backward: gradient shape does not match forward output");
  const auto d_out = d_output.data();
  if (spec.kind == PoolKind::kMax) {
    Require(argmax.size() == d_out.size(), ErrorCode::kInvalidArgument,
            "pool backward: missing forward cache");
    for (size_t o = 0; o < d_out.size(); ++o) d_input.data()[argmax[o]] += d_out[o];
    return d_input;
  }
  const double inv_area = 1.0 / (spec.extent * spec.extent);
  size_t o = 0;
  for (int c = 0; c < d_input.channels(); ++c)
    for (int oh = 0; oh < out_h; ++oh)
      for (int ow = 0; ow < out_w; ++ow, ++o)
        for (int i = 0; i < spec.extent; ++i)
          for (int j = 0; j < spec.extent; ++j)
            d_input.at(c, oh * spec.stride + i, ow * spec.stride + j) += d_out[o] * inv_area;
  return d_input;
}

// ---------------------------------------------------------------------------

namespace {

void MfmSpan(std::span<const double> in, std::span<double> out,
             std::vector<uint8_t> *pick_upper) {
  const size_t half = out.size();
  if (pick_upper) pick_upper->assign(half, 0);
  for (size_t i = 0; i < half; ++i) {
    const double lo = in[i], hi = in[i + half];
    const bool upper = hi > lo;
    out[i] = upper ? hi : lo;
    if (pick_upper) (*pick_upper)[i] = upper;
  }
}

void MfmBackSpan(std::span<const double> d_out, std::span<double> d_in,
                 const std::vector<uint8_t> &pick_upper) {
  const size_t half = d_out.size();
  Require(pick_upper.size() == half, ErrorCode::kInvalidArgument,
          "mfm backward: missing forward cache");
  for (size_t i = 0; i < half; ++i) d_in[i + (pick_upper[i] ? half : 0)] = d_out[i];
}

}  // namespace

Tensor3 MfmForward(const Tensor3 &input, std::vector<uint8_t> *pick_upper) {
  Require(input.channels() % 2 == 0, ErrorCode::kInvalidArgument,
          "mfm needs an even channel count, got " + std::to_string(input.channels()));
  Tensor3 out(input.channels() / 2, input.height(), input.width());
  MfmSpan(input.data(), out.data(), pick_upper);
  return out;
}

Tensor3 MfmBackward(const Tensor3 &d_output, const std::vector<uint8_t> &pick_upper) {
  Tensor3 d_input(d_output.channels() * 2, d_output.height(), d_output.width());
  MfmBackSpan(d_output.data(), d_input.data(), pick_upper);
  return d_input;
}

Vector MfmForward(const Vector &input, std::vector<uint8_t> *pick_upper) {
  Require(input.size() % 2 == 0, ErrorCode::kInvalidArgument,
          "mfm needs an even input size");
  Vector out(input.size() / 2);
  MfmSpan({input.data(), static_cast<size_t>(input.size())},
          {out.data(), static_cast<size_t>(out.size())}, pick_upper);
  return out;
}

Vector MfmBackward(const Vector &d_output, const std::vector<uint8_t> &pick_upper) {
  Vector d_input = Vector::Zero(d_output.size() * 2);
  MfmBackSpan({d_output.data(), static_cast<size_t>(d_output.size())},
              {d_input.data(), static_cast<size_t>(d_input.size())}, pick_upper);
  return d_input;
}

// ---------------------------------------------------------------------------

DenseParams DenseParams::Zeros(int in, int out) {
  Require(in > 0 && out > 0, ErrorCode::kInvalidArgument, "dense sizes must be positive");
  return {RowMatrix::Zero(out, in), Vector::Zero(out)};
}

Vector DenseForward(const DenseParams &params, const Vector &x) {
  RequireMatching(x.size() == params.weights.cols(),
                  "dense: input size " + std::to_string(x.size()) + " vs " +
                      std::to_string(params.weights.cols()));
  return params.weights * x + params.bias;
}

Vector DenseBackward(const DenseParams &params, const Vector &x,
                     const Vector &d_out, DenseParams *grad) {
  grad->weights.noalias() += d_out * x.transpose();
  grad->bias += d_out;
  return params.weights.transpose() * d_out;
}

HighwayParams HighwayParams::Zeros(int dim) {
  Require(dim > 0, ErrorCode::kInvalidArgument, "highway dim must be positive");
  return {RowMatrix::Zero(dim, dim), RowMatrix::Zero(dim, dim), Vector::Zero(dim),
          Vector::Zero(dim)};
}

Vector HighwayForward(const HighwayParams &params, const Vector &x,
                      HighwayCache *cache) {
  RequireMatching(params.w_h.rows() == params.w_h.cols() &&
                      params.w_t.rows() == params.w_t.cols() &&
                      params.w_h.rows() == params.w_t.rows(),
                  "highway: transforms must be square and equal-sized");
  RequireMatching(x.size() == params.w_h.cols(), "highway: input size mismatch");
  HighwayCache local;
  HighwayCache &c = cache ? *cache : local;
  c.x = x;
  c.h_pre = params.w_h * x + params.b_h;
  c.h = c.h_pre.cwiseMax(0.0);
  c.gate = (params.w_t * x + params.b_t).unaryExpr(&SigmoidScalar);
  return (c.h.array() * c.gate.array() + x.array() * (1.0 - c.gate.array())).matrix();
}

Vector HighwayBackward(const HighwayParams &params, const HighwayCache &cache,
                       const Vector &d_y, HighwayParams *grad) {
  const auto t = cache.gate.array();
  const Vector d_h_pre =
      (d_y.array() * t * (cache.h_pre.array() > 0.0).cast<double>()).matrix();
  const Vector d_t_pre =
      (d_y.array() * (cache.h.array() - cache.x.array()) * t * (1.0 - t)).matrix();
  grad->w_h.noalias() += d_h_pre * cache.x.transpose();
  grad->b_h += d_h_pre;
  grad->w_t.noalias() += d_t_pre * cache.x.transpose();
  grad->b_t += d_t_pre;
  return (d_y.array() * (1.0 - t)).matrix() + params.w_h.transpose() * d_h_pre +
         params.w_t.transpose() * d_t_pre;
}

// ---------------------------------------------------------------------------

Vector Softmax(const Vector &logits) {
  Require(logits.size() > 0 && logits.allFinite(), ErrorCode::kNumerical,
          "softmax needs finite logits");
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

double CrossEntropy(std::span<const double> predictions, std::span<const int> targets) {
  Require(!predictions.empty() && predictions.size() == targets.size(),
          ErrorCode::kShapeMismatch, "cross-entropy needs matching non-empty inputs");
  double total = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const int t = targets[i];
    Require(t == 0 || t == 1, ErrorCode::kInvalidArgument,
            "cross-entropy target " + std::to_string(t) + " is not 0 or 1");
    const double f = std::clamp(predictions[i], kProbabilityClip, 1.0 - kProbabilityClip);
    total -= t ? std::log(f) : std::log(1.0 - f);
  }
  return total / static_cast<double>(predictions.size());
}

Vector SoftmaxCrossEntropyGrad(double p_positive, int target) {
  Require(target == 0 || target == 1, ErrorCode::kInvalidArgument,
          "target must be 0 or 1");
  const double d = p_positive - target;
  Vector g(2);
  g << -d, d;
  return g;
}

// ---------------------------------------------------------------------------

Vector Dropout(const Vector &input, double p, Mode mode, Rng *rng, Vector *mask) {
  Require(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
          "dropout probability must lie in [0, 1)");
  if (mode == Mode::kEval || p == 0.0) {
    if (mask) mask->resize(0);
    return input;
  }
  Require(rng != nullptr, ErrorCode::kInvalidArgument, "train-mode dropout needs an rng");
  const double keep_scale = 1.0 / (1.0 - p);
  Vector m(input.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = rng->Uniform() < p ? 0.0 : keep_scale;
  Vector out = input.cwiseProduct(m);
  if (mask) *mask = std::move(m);
  return out;
}

Vector Dropout(const Vector &input, double p, Mode mode, uint64_t seed) {
  Rng rng(seed);
  return Dropout(input, p, mode, &rng);
}

// ---------------------------------------------------------------------------

void SgdStep(std::span<double> params, std::span<const double> grads, double lr) {
  Require(params.size() == grads.size(), ErrorCode::kShapeMismatch,
          "sgd: parameter and gradient sizes differ");
  for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

void SgdOptimizer::Step(const std::vector<std::span<double>> &params,
                        const std::vector<std::span<double>> &grads) {
  Require(params.size() == grads.size(), ErrorCode::kShapeMismatch,
          "sgd: parameter and gradient lists differ");
  if (momentum_ == 0.0) {
    for (size_t t = 0; t < params.size(); ++t) SgdStep(params[t], grads[t], learning_rate_);
    return;
  }
  if (velocity_.empty())
    for (const auto &p : params) velocity_.emplace_back(p.size(), 0.0);
  for (size_t t = 0; t < params.size(); ++t) {
    auto &v = velocity_[t];
    Require(v.size() == params[t].size() && v.size() == grads[t].size(),
            ErrorCode::kShapeMismatch, "sgd: tensor sizes changed between steps");
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = momentum_ * v[i] + grads[t][i];
      params[t][i] -= learning_rate_ * v[i];
    }
  }
}

// ---------------------------------------------------------------------------

void LegSpec::Validate() const {
  Require(input_frames > 0 && input_dim > 0, ErrorCode::kInvalidArgument,
          "leg input extents must be positive");
  Require(!conv_filters.empty(), ErrorCode::kInvalidArgument,
          "leg needs at least one conv block");
  for (int f : conv_filters)
    Require(f > 0 && f % 2 == 0, ErrorCode::kInvalidArgument,
            "conv filter counts must be positive and even (MFM halves them)");
  Require(kernel > 0 && kernel % 2 == 1, ErrorCode::kInvalidArgument,
          "conv kernel must be odd");
  Require(hidden > 0, ErrorCode::kInvalidArgument, "hidden size must be positive");
  Require(dropout >= 0.0 && dropout < 1.0, ErrorCode::kInvalidArgument,
          "dropout must lie in [0, 1)");
  BlockShapes();
}

std::vector<std::array<int, 3>> LegSpec::BlockShapes() const {
  std::vector<std::array<int, 3>> shapes;
  int h = input_frames, w = input_dim;
  for (int f : conv_filters) {
    // Stride-1 same-padding conv keeps h, w.
    Require(pool.extent <= h && pool.extent <= w, ErrorCode::kInvalidArgument,
            "input " + std::to_string(input_frames) + "x" + std::to_string(input_dim) +
                " too small for " + std::to_string(conv_filters.size()) +
                " pooling stages");
    h = pool.OutputExtent(h);
    w = pool.OutputExtent(w);
    shapes.push_back({f / 2, h, w});
  }
  return shapes;
}

int LegSpec::FlatSize() const {
  const auto last = BlockShapes().back();
  return last[0] * last[1] * last[2];
}

LegParams LegParams::Zeros(const LegSpec &spec) {
  spec.Validate();
  LegParams p;
  int in_channels = 1;
  for (int f : spec.conv_filters) {
    p.convs.push_back(ConvParams::Zeros(in_channels, f, spec.kernel));
    in_channels = f / 2;
  }
  p.hidden = DenseParams::Zeros(spec.FlatSize(), 2 * spec.hidden);
  return p;
}

LegParams LegParams::Init(const LegSpec &spec, Rng *rng) {
  LegParams p = Zeros(spec);
  const int taps = spec.kernel * spec.kernel;
  for (auto &c : p.convs) {
    const double r = std::sqrt(6.0 / ((c.in_channels + c.filters()) * taps));
    for (Eigen::Index i = 0; i < c.weights.size(); ++i)
      c.weights.data()[i] = rng->Uniform(-r, r);
  }
  const double r = std::sqrt(
      6.0 / static_cast<double>(p.hidden.weights.cols() + p.hidden.weights.rows()));
  for (Eigen::Index i = 0; i < p.hidden.weights.size(); ++i)
    p.hidden.weights.data()[i] = rng->Uniform(-r, r);
  return p;
}

size_t LegParams::NumParameters() const {
  size_t n = 0;
  for (const auto &c : convs) n += static_cast<size_t>(c.weights.size() + c.bias.size());
  return n + static_cast<size_t>(hidden.weights.size() + hidden.bias.size());
}

Vector LegForward(const LegSpec &spec, const LegParams &params,
                  const Tensor3 &input, Mode mode, Rng *rng, LegCache *cache) {
  RequireMatching(input.channels() == 1 && input.height() == spec.input_frames &&
                      input.width() == spec.input_dim,
                  "leg: expected 1x" + std::to_string(spec.input_frames) + "x" +
                      std::to_string(spec.input_dim) + " input, got " +
                      std::to_string(input.channels()) + "x" +
                      std::to_string(input.height()) + "x" + std::to_string(input.width()));
  const size_t blocks = params.convs.size();
  if (cache) {
    cache->block_input.resize(blocks);
    cache->conv_out.resize(blocks);
    cache->mfm_pick.resize(blocks);
    cache->mfm_out.resize(blocks);
    cache->pool_index.resize(blocks);
  }
  Tensor3 x = input;
  std::vector<uint8_t> pick;
  std::vector<int> index;
  for (size_t b = 0; b < blocks; ++b) {
    Tensor3 conv = ConvForward(x, params.convs[b]);
    Tensor3 mfm = MfmForward(conv, cache ? &pick : nullptr);
    Tensor3 pooled = PoolForward(mfm, spec.pool, cache ? &index : nullptr);
    if (cache) {
      cache->block_input[b] = std::move(x);
      cache->conv_out[b] = std::move(conv);
      cache->mfm_pick[b] = std::move(pick);
      cache->mfm_out[b] = std::move(mfm);
      cache->pool_index[b] = std::move(index);
    }
    x = std::move(pooled);
  }
  Vector flat = Eigen::Map<const Vector>(x.data().data(), static_cast<Eigen::Index>(x.size()));
  Vector dense = DenseForward(params.hidden, flat);
  Vector embedding = MfmForward(dense, cache ? &pick : nullptr);
  Vector mask;
  if (mode == Mode::kTrain && spec.dropout > 0.0)
    embedding = Dropout(embedding, spec.dropout, mode, rng, &mask);
  if (cache) {
    cache->flat = std::move(flat);
    cache->dense_out = std::move(dense);
    cache->dense_pick = std::move(pick);
    cache->dropout_mask = std::move(mask);
  }
  return embedding;
}

void LegBackward(const LegSpec &spec, const LegParams &params,
                 const LegCache &cache, const Vector &d_embedding,
                 LegParams *grads) {
  const size_t blocks = params.convs.size();
  Require(cache.block_input.size() == blocks && cache.flat.size() > 0,
          ErrorCode::kInvalidArgument, "leg backward: missing forward cache");
  Vector d = d_embedding;
  if (cache.dropout_mask.size() > 0) d = d.cwiseProduct(cache.dropout_mask);
  const Vector d_dense = MfmBackward(d, cache.dense_pick);
  const Vector d_flat = DenseBackward(params.hidden, cache.flat, d_dense, &grads->hidden);

  const auto last = spec.BlockShapes().back();
  Tensor3 d_x(last[0], last[1], last[2]);
  std::copy(d_flat.data(), d_flat.data() + d_flat.size(), d_x.data().begin());
  for (size_t b = blocks; b-- > 0;) {
    const Tensor3 d_mfm = PoolBackward(cache.mfm_out[b], spec.pool, d_x, cache.pool_index[b]);
    const Tensor3 d_conv = MfmBackward(d_mfm, cache.mfm_pick[b]);
    d_x = ConvBackward(cache.block_input[b], params.convs[b], d_conv, &grads->convs[b]);
  }
}

}  // namespace spoofguard
