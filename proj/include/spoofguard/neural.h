// spoofguard/neural.h

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

// Layer kernels with hand-written backward passes: convolution, pooling,
// max-feature-map, dense, highway, softmax, cross-entropy and dropout, plus
// the convolutional "leg" that stacks them.
//
// Backward functions accumulate into gradient buffers (+=) so that the two
// legs of a Siamese pair can add into one shared set.

#ifndef SPOOFGUARD_NEURAL_H_
#define SPOOFGUARD_NEURAL_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "spoofguard/base.h"

namespace spoofguard {

/// channels x height x width, row-major; height is time, width is feature.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, double fill = 0.0);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }

  double &at(int c, int h, int w) {
    return data_[(static_cast<size_t>(c) * height_ + h) * width_ + w];
  }
  double at(int c, int h, int w) const {
    return data_[(static_cast<size_t>(c) * height_ + h) * width_ + w];
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  /// Channel-major view with one row per channel.
  Eigen::Map<RowMatrix> AsMatrix() {
    return {data_.data(), channels_, static_cast<Eigen::Index>(height_) * width_};
  }
  Eigen::Map<const RowMatrix> AsMatrix() const {
    return {data_.data(), channels_, static_cast<Eigen::Index>(height_) * width_};
  }
  bool SameShape(const Tensor3 &o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

 private:
  int channels_ = 0, height_ = 0, width_ = 0;
  // Aligned storage keeps Eigen's vectorized loops on the same element
  // partition from one allocation to the next, so results are bit-stable.
  std::vector<double, Eigen::aligned_allocator<double>> data_;
};

enum class Mode { kTrain, kEval };
enum class PoolKind { kMax, kAvg };

const char *PoolKindName(PoolKind kind);
PoolKind ParsePoolKind(const std::string &name);

// ---------------------------------------------------------------------------
// Convolution. Zero padding of kernel/2 keeps the spatial extent at stride 1.

struct ConvParams {
  RowMatrix weights;  // filters x (in_channels * kernel * kernel), [c][i][j]
  Vector bias;        // filters
  int in_channels = 0;
  int kernel = 3;
  int stride = 1;

  static ConvParams Zeros(int in_channels, int filters, int kernel, int stride = 1);
  int filters() const { return static_cast<int>(weights.rows()); }
  int padding() const { return kernel / 2; }
  int OutputExtent(int extent) const {
    return (extent + 2 * padding() - kernel) / stride + 1;
  }
};

Tensor3 ConvForward(const Tensor3 &input, const ConvParams &params);
/// Returns d(input); accumulates weight and bias gradients into `grad`.
Tensor3 ConvBackward(const Tensor3 &input, const ConvParams &params,
                     const Tensor3 &d_output, ConvParams *grad);

// ---------------------------------------------------------------------------
// Pooling (no padding; trailing cells that do not fill a window are dropped).

struct PoolSpec {
  PoolKind kind = PoolKind::kMax;
  int extent = 2;
  int stride = 2;

  int OutputExtent(int extent_in) const { return (extent_in - extent) / stride + 1; }
};

/// For max pooling `argmax` receives the flat input index of each output.
Tensor3 PoolForward(const Tensor3 &input, const PoolSpec &spec,
                    std::vector<int> *argmax = nullptr);
Tensor3 PoolBackward(const Tensor3 &input_shape, const PoolSpec &spec,
                     const Tensor3 &d_output, const std::vector<int> &argmax);

// ---------------------------------------------------------------------------
// Max-feature-map: output c = max(input c, input c + C/2).

Tensor3 MfmForward(const Tensor3 &input, std::vector<uint8_t> *pick_upper = nullptr);
Tensor3 MfmBackward(const Tensor3 &d_output, const std::vector<uint8_t> &pick_upper);
/// Vector form: output i = max(x_i, x_{i + n/2}).
Vector MfmForward(const Vector &input, std::vector<uint8_t> *pick_upper = nullptr);
Vector MfmBackward(const Vector &d_output, const std::vector<uint8_t> &pick_upper);

// ---------------------------------------------------------------------------
// Fully connected layers.

struct DenseParams {
  RowMatrix weights;  // out x in
  Vector bias;        // out

  static DenseParams Zeros(int in, int out);
};

Vector DenseForward(const DenseParams &params, const Vector &x);
Vector DenseBackward(const DenseParams &params, const Vector &x,
                     const Vector &d_out, DenseParams *grad);

/// y = H * T + x * (1 - T), H = ReLU(W_H x + b_H), T = sigmoid(W_T x + b_T).
struct HighwayParams {
  RowMatrix w_h, w_t;
  Vector b_h, b_t;

  static HighwayParams Zeros(int dim);
  int dim() const { return static_cast<int>(w_h.rows()); }
};

struct HighwayCache {
  Vector x, h_pre, h, gate;
};

Vector HighwayForward(const HighwayParams &params, const Vector &x,
                      HighwayCache *cache = nullptr);
Vector HighwayBackward(const HighwayParams &params, const HighwayCache &cache,
                       const Vector &d_y, HighwayParams *grad);

// ---------------------------------------------------------------------------
// Output layer and loss.

/// Max-subtracted softmax.
Vector Softmax(const Vector &logits);

inline constexpr double kProbabilityClip = 1e-12;

/// Mean binary cross-entropy  -[t ln f + (1 - t) ln(1 - f)], with f clipped
/// to [eps, 1 - eps]. Targets must be 0 or 1.
double CrossEntropy(std::span<const double> predictions, std::span<const int> targets);

/// Gradient of the binary cross-entropy of a two-way softmax with respect to
/// its logits, where `p_positive` is the class-1 probability.
Vector SoftmaxCrossEntropyGrad(double p_positive, int target);

// ---------------------------------------------------------------------------
// Dropout (inverted: survivors are scaled by 1 / (1 - p)).

Vector Dropout(const Vector &input, double p, Mode mode, Rng *rng,
               Vector *mask = nullptr);
Vector Dropout(const Vector &input, double p, Mode mode, uint64_t seed);

// ---------------------------------------------------------------------------
// Optimizer.

/// theta <- theta - lr * grad.
void SgdStep(std::span<double> params, std::span<const double> grads, double lr);

/// Heavy-ball variant: v <- momentum * v + grad; theta <- theta - lr * v.
/// With momentum 0 this is exactly SgdStep.
class SgdOptimizer {
 public:
  SgdOptimizer(double learning_rate, double momentum)
      : learning_rate_(learning_rate), momentum_(momentum) {}

  void Step(const std::vector<std::span<double>> &params,
            const std::vector<std::span<double>> &grads);

 private:
  double learning_rate_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

// ---------------------------------------------------------------------------
// Convolutional leg: [conv -> MFM -> pool] per block, flatten, dense,
// MFM, dropout. Each block's filter count is halved by MFM.

struct LegSpec {
  int input_frames = 0;
  int input_dim = 0;
  std::vector<int> conv_filters;
  int kernel = 3;
  PoolSpec pool;
  int hidden = 0;  // embedding size; the dense layer emits 2 * hidden
  double dropout = 0.0;

  void Validate() const;
  /// Shape (channels, height, width) after each block's pooling.
  std::vector<std::array<int, 3>> BlockShapes() const;
  int FlatSize() const;
};

struct LegParams {
  std::vector<ConvParams> convs;
  DenseParams hidden;

  static LegParams Zeros(const LegSpec &spec);
  /// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
  static LegParams Init(const LegSpec &spec, Rng *rng);

  template <class F>
  void ForEachTensor(F &&f) {
    for (auto &c : convs) {
      f(std::span<double>(c.weights.data(), static_cast<size_t>(c.weights.size())));
      f(std::span<double>(c.bias.data(), static_cast<size_t>(c.bias.size())));
    }
    f(std::span<double>(hidden.weights.data(), static_cast<size_t>(hidden.weights.size())));
    f(std::span<double>(hidden.bias.data(), static_cast<size_t>(hidden.bias.size())));
  }
  size_t NumParameters() const;
};

struct LegCache {
  std::vector<Tensor3> block_input;
  std::vector<Tensor3> conv_out;
  std::vector<std::vector<uint8_t>> mfm_pick;
  std::vector<Tensor3> mfm_out;
  std::vector<std::vector<int>> pool_index;
  Vector flat;
  Vector dense_out;
  std::vector<uint8_t> dense_pick;
  Vector dropout_mask;
};

/// Returns the embedding (size spec.hidden). `rng` is only used in train mode
/// with dropout > 0; `cache` may be null when no backward pass follows.
Vector LegForward(const LegSpec &spec, const LegParams &params,
                  const Tensor3 &input, Mode mode, Rng *rng, LegCache *cache);
void LegBackward(const LegSpec &spec, const LegParams &params,
                 const LegCache &cache, const Vector &d_embedding,
                 LegParams *grads);

/// Appends mutable views of every tensor in `p` to `out`.
template <class P>
void CollectSpans(P &p, std::vector<std::span<double>> *out) {
  p.ForEachTensor([out](std::span<double> s) { out->push_back(s); });
}

}  // namespace spoofguard

#endif  // SPOOFGUARD_NEURAL_H_
