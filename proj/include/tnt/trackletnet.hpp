#pragma once

// Multi-scale time-domain connectivity network.
//
// Input: a (4 + d_ap) x T x 3 tensor. Channel 0 holds, per frame column, the
// normalized box (cx, cy, w, h) followed by the appearance feature; channels
// 1 and 2 are binary masks marking the columns covered by each tracklet.
//
// Three conv blocks. In each, four 1xk kernels (k = 3, 5, 9, 13) slide along
// time only, C output channels each, same padding; the 4C outputs are
// concatenated, rectified and max-pooled by 2 in time. After block 3 the
// appearance rows are averaged (location rows are kept), giving 4C x 5 x T/8,
// which goes through FC1 (rectified) and FC2 into a logistic output.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tnt/core.hpp"

namespace tnt {

struct NetConfig {
  static constexpr std::array<int, 4> kKernelSizes{3, 5, 9, 13};

  int T = 64;
  int d_ap = 8;
  int channels = 16;  // per kernel size
  int fc_hidden = 128;
  std::uint64_t seed = 0;

  int rows() const { return 4 + d_ap; }
  int block_channels() const { return 4 * channels; }
  int fc_inputs() const { return block_channels() * 5 * (T / 8); }

  void validate() const;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Stored channel-major: at(row, t, ch) = values[(ch * rows + row) * T + t].
class InputTensor {
 public:
  InputTensor() = default;
  InputTensor(int rows, int time);

  int rows() const { return rows_; }
  int time() const { return time_; }

  double& at(int row, int t, int ch) { return values_[index(row, t, ch)]; }
  double at(int row, int t, int ch) const { return values_[index(row, t, ch)]; }

  // Contiguous time line of one row in one channel.
  std::span<const double> line(int row, int ch) const {
    return {values_.data() + index(row, 0, ch), static_cast<std::size_t>(time_)};
  }
  std::span<double> line(int row, int ch) {
    return {values_.data() + index(row, 0, ch), static_cast<std::size_t>(time_)};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int row, int t, int ch) const {
    return (static_cast<std::size_t>(ch) * rows_ + row) * time_ + t;
  }

  int rows_ = 0;
  int time_ = 0;
  std::vector<double> values_;
};

template <typename Real>
struct ConvBranch {
  int kernel = 0;
  std::vector<Real> weight;  // out x in x 1 x k
  std::vector<Real> bias;    // out
};

template <typename Real>
struct ConvLayer {
  int in_channels = 0;
  std::array<ConvBranch<Real>, 4> branches;
};

// Tensor dimensions as written to the weight file.
using TensorDims = std::vector<std::uint32_t>;

template <typename Real>
struct BasicNetWeights {
  NetConfig config;
  std::array<ConvLayer<Real>, 3> conv;
  std::vector<Real> fc1_weight;  // fc_hidden x fc_inputs, row-major
  std::vector<Real> fc1_bias;    // fc_hidden
  std::vector<Real> fc2_weight;  // 1 x fc_hidden
  std::vector<Real> fc2_bias;    // 1

  // All tensors zero, shapes from cfg.
  static BasicNetWeights zeros(const NetConfig& cfg);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
  static BasicNetWeights glorot(const NetConfig& cfg, std::uint64_t seed);

  // Visits every tensor in file order: conv1..conv3, each branch weight then
  // bias (kernels ascending), then fc1 weight, fc1 bias, fc2 weight, fc2 bias.
  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    for (auto& layer : self.conv) {
      for (auto& branch : layer.branches) {
        f(std::span(branch.weight),
          TensorDims{static_cast<std::uint32_t>(self.config.channels),
                     static_cast<std::uint32_t>(layer.in_channels), 1u,
                     static_cast<std::uint32_t>(branch.kernel)});
        f(std::span(branch.bias), TensorDims{static_cast<std::uint32_t>(self.config.channels)});
      }
    }
    const auto hidden = static_cast<std::uint32_t>(self.config.fc_hidden);
    f(std::span(self.fc1_weight),
      TensorDims{hidden, static_cast<std::uint32_t>(self.config.fc_inputs())});
    f(std::span(self.fc1_bias), TensorDims{hidden});
    f(std::span(self.fc2_weight), TensorDims{1u, hidden});
    f(std::span(self.fc2_bias), TensorDims{1u});
  }
};

using NetWeights = BasicNetWeights<float>;

template <typename To, typename From>
BasicNetWeights<To> weights_cast(const BasicNetWeights<From>& from) {
  BasicNetWeights<To> to = BasicNetWeights<To>::zeros(from.config);
  std::vector<std::span<const From>> src;
  from.for_each_tensor([&](std::span<const From> s, const TensorDims&) { src.push_back(s); });
  std::size_t k = 0;
  to.for_each_tensor([&](std::span<To> d, const TensorDims&) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<To>(src[k][i]);
    ++k;
  });
  return to;
}

// Builds the network input for u followed by w. Requires u to end before w
// starts with w.first - u.last < T; throws kAssembly otherwise and kShape on
// a feature-length mismatch. When the pair spans more than T frames, u is
// cut to its last ceil(T/2) frames (and fewer if the gap needs the room) and
// w's tail is dropped to fit.
InputTensor assemble_input(const Tracklet& u, const Tracklet& w, const FrameMeta& meta,
                           const NetConfig& cfg);

// Logit and probability of one forward pass. Throws kShape on mismatch.
template <typename Real>
double forward_logit(const InputTensor& x, const BasicNetWeights<Real>& w);

template <typename Real>
double forward(const InputTensor& x, const BasicNetWeights<Real>& w);

struct LabeledInput {
  InputTensor input;
  int label = 0;
};

template <typename Real>
struct LossGradient {
  double loss = 0.0;
  BasicNetWeights<Real> grad;
  std::vector<double> probabilities;
};

// Mean binary cross-entropy (p clamped to [1e-7, 1 - 1e-7]) and its exact
// gradient by reverse-mode differentiation.
template <typename Real>
LossGradient<Real> loss_and_gradient(std::span<const LabeledInput> batch,
                                     const BasicNetWeights<Real>& w);

// 0 for time-overlapping pairs and pairs at least T frames apart, otherwise
// the network output for (earlier, later). Symmetric in its arguments.
double connectivity(const Tracklet& u, const Tracklet& w, const NetWeights& wts,
                    const FrameMeta& meta);

}  // namespace tnt
