#include "tnt/trackletnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tnt/simd.hpp"

namespace tnt {
namespace {

// Forward intermediates needed by the backward pass.
template <typename Real>
struct Activations {
  // block_in[b]: in_channels x rows x (T >> b); block_in[0] is the input.
  std::array<std::vector<Real>, 3> block_in;
  // relu[b]: 4C x rows x (T >> b), after rectification.
  std::array<std::vector<Real>, 3> relu;
  // pick[b]: offset (0 or 1) of the maximum inside each pooling pair.
  std::array<std::vector<unsigned char>, 3> pick;
  std::vector<Real> pooled;  // 4C x rows x T/8
  std::vector<Real> flat;    // 4C x 5 x T/8
  std::vector<Real> hidden;  // fc_hidden, rectified
  double logit = 0.0;
};

void check_input(const InputTensor& x, const NetConfig& cfg) {
  if (x.rows() != cfg.rows() || x.time() != cfg.T) {
    fail(ErrorKind::kShape, "input tensor is " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.time()) + ", network expects " +
                                std::to_string(cfg.rows()) + "x" + std::to_string(cfg.T));
  }
}

template <typename Real>
void check_weights(const BasicNetWeights<Real>& w) {
  const NetConfig& cfg = w.config;
  const auto expect = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
      fail(ErrorKind::kShape, std::string(what) + " has " + std::to_string(got) +
                                  " values, expected " + std::to_string(want));
    }
  };
  for (int b = 0; b < 3; ++b) {
    const int in = b == 0 ? 3 : cfg.block_channels();
    if (w.conv[b].in_channels != in) fail(ErrorKind::kShape, "conv input channel mismatch");
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& br = w.conv[b].branches[k];
      if (br.kernel != NetConfig::kKernelSizes[k]) fail(ErrorKind::kShape, "kernel size mismatch");
      expect(br.weight.size(), static_cast<std::size_t>(cfg.channels * in * br.kernel),
             "conv weight");
      expect(br.bias.size(), static_cast<std::size_t>(cfg.channels), "conv bias");
    }
  }
  expect(w.fc1_weight.size(), static_cast<std::size_t>(cfg.fc_hidden) * cfg.fc_inputs(),
         "fc1 weight");
  expect(w.fc1_bias.size(), static_cast<std::size_t>(cfg.fc_hidden), "fc1 bias");
  expect(w.fc2_weight.size(), static_cast<std::size_t>(cfg.fc_hidden), "fc2 weight");
  expect(w.fc2_bias.size(), 1, "fc2 bias");
}

template <typename Real>
std::vector<Real> to_real(const InputTensor& x) {
  std::vector<Real> v(x.values().size());
  std::transform(x.values().begin(), x.values().end(), v.begin(),
                 [](double d) { return static_cast<Real>(d); });
  return v;
}

template <typename Real>
std::size_t max_kernel(const BasicNetWeights<Real>& w) {
  int k = 1;
  for (const ConvBranch<Real>& br : w.conv[0].branches) k = std::max(k, br.kernel);
  return static_cast<std::size_t>(k);
}

// Lines of length len stored with kmax / 2 zeros on each side.
template <typename Real>
class PaddedLines {
 public:
  PaddedLines(const std::vector<Real>& x, std::size_t lines, int len, std::size_t kmax)
      : half_(kmax / 2), stride_(static_cast<std::size_t>(len) + 2 * half_),
        data_(lines * stride_, Real(0)) {
    for (std::size_t l = 0; l < lines; ++l) {
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(l * len), len,
                  data_.begin() + static_cast<std::ptrdiff_t>(l * stride_ + half_));
    }
  }

  // Start of line l as seen by a kernel of odd width k.
  const Real* line(std::size_t l, std::size_t k) const {
    return data_.data() + l * stride_ + half_ - k / 2;
  }

 private:
  std::size_t half_;
  std::size_t stride_;
  std::vector<Real> data_;
};

template <typename Real>
void run_forward(const std::vector<Real>& input, const BasicNetWeights<Real>& w,
                 Activations<Real>& act) {
  const NetConfig& cfg = w.config;
  const auto& kt = simd::active_kernels<Real>();
  const int rows = cfg.rows();
  const int C = cfg.channels;
  const int out_ch = cfg.block_channels();

  act.block_in[0] = input;
  std::vector<Real> pooled;
  for (int b = 0; b < 3; ++b) {
    const int in_ch = w.conv[b].in_channels;
    const int len = cfg.T >> b;
    const int half = len / 2;
    const auto ulen = static_cast<std::size_t>(len);
    const std::size_t line_stride = static_cast<std::size_t>(rows) * ulen;
    const std::vector<Real>& x = act.block_in[b];
    std::vector<Real>& y = act.relu[b];
    y.assign(static_cast<std::size_t>(out_ch) * rows * len, Real(0));

    const PaddedLines<Real> xp(x, static_cast<std::size_t>(in_ch) * rows, len, max_kernel(w));
    for (int kb = 0; kb < 4; ++kb) {
      const ConvBranch<Real>& br = w.conv[b].branches[kb];
      const auto k = static_cast<std::size_t>(br.kernel);
      Real* yb = y.data() + static_cast<std::size_t>(kb) * C * line_stride;
      for (int o = 0; o < C; ++o) {
        std::fill(yb + o * line_stride, yb + (o + 1) * line_stride, br.bias[o]);
      }
      for (int i = 0; i < in_ch; ++i) {
        for (int r = 0; r < rows; ++r) {
          kt.correlate_many(xp.line(static_cast<std::size_t>(i) * rows + r, k), ulen,
                            br.weight.data() + static_cast<std::size_t>(i) * k, k,
                            static_cast<std::size_t>(in_ch) * k, static_cast<std::size_t>(C),
                            yb + static_cast<std::size_t>(r) * len, line_stride);
        }
      }
    }
    for (Real& v : y) v = std::max(v, Real(0));

    pooled.assign(static_cast<std::size_t>(out_ch) * rows * half, Real(0));
    act.pick[b].assign(pooled.size(), 0);
    for (std::size_t line = 0; line < static_cast<std::size_t>(out_ch) * rows; ++line) {
      const Real* src = y.data() + line * len;
      for (int t = 0; t < half; ++t) {
        const Real a = src[2 * t];
        const Real c = src[2 * t + 1];
        const std::size_t idx = line * half + t;
        if (c > a) {
          pooled[idx] = c;
          act.pick[b][idx] = 1;
        } else {
          pooled[idx] = a;
        }
      }
    }
    if (b < 2) {
      act.block_in[b + 1] = pooled;
    } else {
      act.pooled = pooled;
    }
  }

  // Appearance rows averaged, location rows kept.
  const int tl = cfg.T / 8;
  act.flat.assign(static_cast<std::size_t>(out_ch) * 5 * tl, Real(0));
  const Real inv_dap = Real(1) / static_cast<Real>(cfg.d_ap);
  for (int c = 0; c < out_ch; ++c) {
    for (int r = 0; r < rows; ++r) {
      const Real* src = act.pooled.data() + (static_cast<std::size_t>(c) * rows + r) * tl;
      Real* dst = act.flat.data() + (static_cast<std::size_t>(c) * 5 + std::min(r, 4)) * tl;
      for (int t = 0; t < tl; ++t) dst[t] += r < 4 ? src[t] : src[t] * inv_dap;
    }
  }

  const auto n_flat = act.flat.size();
  act.hidden.assign(static_cast<std::size_t>(cfg.fc_hidden), Real(0));
  for (int h = 0; h < cfg.fc_hidden; ++h) {
    const Real z = w.fc1_bias[h] + kt.dot(w.fc1_weight.data() + h * n_flat, act.flat.data(), n_flat);
    act.hidden[h] = std::max(z, Real(0));
  }
  act.logit = static_cast<double>(
      w.fc2_bias[0] +
      kt.dot(w.fc2_weight.data(), act.hidden.data(), static_cast<std::size_t>(cfg.fc_hidden)));
}

// Accumulates d(loss)/d(weights) into grad for one sample whose logit
// gradient is g.
template <typename Real>
void run_backward(const Activations<Real>& act, const BasicNetWeights<Real>& w, Real g,
                  BasicNetWeights<Real>& grad) {
  const NetConfig& cfg = w.config;
  const auto& kt = simd::active_kernels<Real>();
  const int rows = cfg.rows();
  const int C = cfg.channels;
  const int out_ch = cfg.block_channels();
  const int tl = cfg.T / 8;

  grad.fc2_bias[0] += g;
  std::vector<Real> dhidden(static_cast<std::size_t>(cfg.fc_hidden));
  for (int h = 0; h < cfg.fc_hidden; ++h) {
    grad.fc2_weight[h] += g * act.hidden[h];
    dhidden[h] = act.hidden[h] > Real(0) ? g * w.fc2_weight[h] : Real(0);
  }

  const auto n_flat = act.flat.size();
  std::vector<Real> dflat(n_flat, Real(0));
  for (int h = 0; h < cfg.fc_hidden; ++h) {
    if (dhidden[h] == Real(0)) continue;
    grad.fc1_bias[h] += dhidden[h];
    kt.axpy(dhidden[h], act.flat.data(), grad.fc1_weight.data() + h * n_flat, n_flat);
    kt.axpy(dhidden[h], w.fc1_weight.data() + h * n_flat, dflat.data(), n_flat);
  }

  std::vector<Real> dpooled(act.pooled.size(), Real(0));
  const Real inv_dap = Real(1) / static_cast<Real>(cfg.d_ap);
  for (int c = 0; c < out_ch; ++c) {
    for (int r = 0; r < rows; ++r) {
      const Real* src = dflat.data() + (static_cast<std::size_t>(c) * 5 + std::min(r, 4)) * tl;
      Real* dst = dpooled.data() + (static_cast<std::size_t>(c) * rows + r) * tl;
      for (int t = 0; t < tl; ++t) dst[t] = r < 4 ? src[t] : src[t] * inv_dap;
    }
  }

  std::vector<Real> reversed;
  for (int b = 2; b >= 0; --b) {
    const int in_ch = w.conv[b].in_channels;
    const int len = cfg.T >> b;
    const int half = len / 2;

    // Through max-pool and rectification.
    std::vector<Real> dz(act.relu[b].size(), Real(0));
    for (std::size_t line = 0; line < static_cast<std::size_t>(out_ch) * rows; ++line) {
      for (int t = 0; t < half; ++t) {
        const std::size_t idx = line * half + t;
        const std::size_t src = line * len + 2 * t + act.pick[b][idx];
        if (act.relu[b][src] > Real(0)) dz[src] = dpooled[idx];
      }
    }

    const auto ulen = static_cast<std::size_t>(len);
    const std::size_t line_stride = static_cast<std::size_t>(rows) * ulen;
    const std::size_t kmax = max_kernel(w);
    const PaddedLines<Real> xp(act.block_in[b], static_cast<std::size_t>(in_ch) * rows, len, kmax);
    const PaddedLines<Real> dzp(dz, static_cast<std::size_t>(out_ch) * rows, len, kmax);
    std::vector<Real> dx;
    if (b > 0) dx.assign(act.block_in[b].size(), Real(0));
    for (int kb = 0; kb < 4; ++kb) {
      const ConvBranch<Real>& br = w.conv[b].branches[kb];
      ConvBranch<Real>& gbr = grad.conv[b].branches[kb];
      const auto k = static_cast<std::size_t>(br.kernel);
      const Real* db = dz.data() + static_cast<std::size_t>(kb) * C * line_stride;
      for (int o = 0; o < C; ++o) {
        Real bias_sum = 0;
        for (std::size_t t = 0; t < line_stride; ++t) bias_sum += db[o * line_stride + t];
        gbr.bias[o] += bias_sum;
      }
      for (int i = 0; i < in_ch; ++i) {
        for (int r = 0; r < rows; ++r) {
          kt.correlate_many_lags(db + static_cast<std::size_t>(r) * len, line_stride,
                                 static_cast<std::size_t>(C),
                                 xp.line(static_cast<std::size_t>(i) * rows + r, k), ulen,
                                 gbr.weight.data() + static_cast<std::size_t>(i) * k, k,
                                 static_cast<std::size_t>(in_ch) * k);
        }
      }
      if (b == 0) continue;
      // Input gradient: correlation with the flipped kernels.
      reversed.assign(br.weight.begin(), br.weight.end());
      for (std::size_t off = 0; off < reversed.size(); off += k) {
        std::reverse(reversed.begin() + static_cast<std::ptrdiff_t>(off),
                     reversed.begin() + static_cast<std::ptrdiff_t>(off + k));
      }
      for (int o = 0; o < C; ++o) {
        for (int r = 0; r < rows; ++r) {
          kt.correlate_many(dzp.line((static_cast<std::size_t>(kb) * C + o) * rows + r, k), ulen,
                            reversed.data() + static_cast<std::size_t>(o) * in_ch * k, k, k,
                            static_cast<std::size_t>(in_ch), dx.data() + static_cast<std::size_t>(r) * len,
                            line_stride);
        }
      }
    }
    if (b > 0) dpooled = std::move(dx);
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kProbClamp = 1e-7;

std::vector<double> embed(const Detection& d, const FrameMeta& meta, int d_ap) {
  if (static_cast<int>(d.feature.size()) != d_ap) {
    fail(ErrorKind::kShape, "feature length " + std::to_string(d.feature.size()) +
                                " does not match d_ap " + std::to_string(d_ap));
  }
  const BoundingBox n = normalize_box(d.box, meta);
  std::vector<double> v{n.cx, n.cy, n.w, n.h};
  v.insert(v.end(), d.feature.values.begin(), d.feature.values.end());
  return v;
}

}  // namespace

void NetConfig::validate() const {
  if (T < 8 || T % 8 != 0) fail(ErrorKind::kConfig, "net.T must be a positive multiple of 8");
  if (d_ap < 1) fail(ErrorKind::kConfig, "net.d_ap must be >= 1");
  if (channels < 1) fail(ErrorKind::kConfig, "net.channels must be >= 1");
  if (fc_hidden < 1) fail(ErrorKind::kConfig, "net.fc_hidden must be >= 1");
}

InputTensor::InputTensor(int rows, int time)
    : rows_(rows), time_(time), values_(static_cast<std::size_t>(rows) * time * 3, 0.0) {}

template <typename Real>
BasicNetWeights<Real> BasicNetWeights<Real>::zeros(const NetConfig& cfg) {
  cfg.validate();
  BasicNetWeights w;
  w.config = cfg;
  for (int b = 0; b < 3; ++b) {
    w.conv[b].in_channels = b == 0 ? 3 : cfg.block_channels();
    for (std::size_t k = 0; k < 4; ++k) {
      auto& br = w.conv[b].branches[k];
      br.kernel = NetConfig::kKernelSizes[k];
      br.weight.assign(static_cast<std::size_t>(cfg.channels * w.conv[b].in_channels * br.kernel),
                       Real(0));
      br.bias.assign(static_cast<std::size_t>(cfg.channels), Real(0));
    }
  }
  w.fc1_weight.assign(static_cast<std::size_t>(cfg.fc_hidden) * cfg.fc_inputs(), Real(0));
  w.fc1_bias.assign(static_cast<std::size_t>(cfg.fc_hidden), Real(0));
  w.fc2_weight.assign(static_cast<std::size_t>(cfg.fc_hidden), Real(0));
  w.fc2_bias.assign(1, Real(0));
  return w;
}

template <typename Real>
BasicNetWeights<Real> BasicNetWeights<Real>::glorot(const NetConfig& cfg, std::uint64_t seed) {
  BasicNetWeights w = zeros(cfg);
  std::mt19937_64 rng(seed);
  const auto fill = [&rng](std::vector<Real>& v, double fan_in, double fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-a, a);
    for (Real& x : v) x = static_cast<Real>(u(rng));
  };
  for (auto& layer : w.conv) {
    for (auto& br : layer.branches) {
      fill(br.weight, static_cast<double>(layer.in_channels) * br.kernel,
           static_cast<double>(cfg.channels) * br.kernel);
    }
  }
  fill(w.fc1_weight, cfg.fc_inputs(), cfg.fc_hidden);
  fill(w.fc2_weight, cfg.fc_hidden, 1.0);
  return w;
}

template <typename Real>
std::size_t BasicNetWeights<Real>::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&n](std::span<const Real> s, const TensorDims&) { n += s.size(); });
  return n;
}

template <typename Real>
bool BasicNetWeights<Real>::all_finite() const {
  bool ok = true;
  for_each_tensor([&ok](std::span<const Real> s, const TensorDims&) {
    for (Real v : s) ok = ok && std::isfinite(v);
  });
  return ok;
}

template struct BasicNetWeights<float>;
template struct BasicNetWeights<double>;

InputTensor assemble_input(const Tracklet& u, const Tracklet& w, const FrameMeta& meta,
                           const NetConfig& cfg) {
  if (u.detections.empty() || w.detections.empty()) {
    fail(ErrorKind::kAssembly, "cannot assemble an empty tracklet");
  }
  if (u.last_frame() >= w.first_frame()) {
    fail(ErrorKind::kAssembly, "tracklets " + std::to_string(u.id) + " and " +
                                   std::to_string(w.id) + " are not in time order");
  }
  const int T = cfg.T;
  const int gap = w.first_frame() - u.last_frame();
  if (gap >= T) {
    fail(ErrorKind::kAssembly, "gap of " + std::to_string(gap) + " frames does not fit T=" +
                                   std::to_string(T));
  }

  int n_u = u.length();
  int n_w = w.length();
  if (w.last_frame() - u.first_frame() + 1 > T) {
    const int budget = T - (gap - 1);  // columns left for real detections
    n_u = std::min({n_u, (T + 1) / 2, budget - 1});
    n_w = std::min(n_w, budget - n_u);
  }
  const int origin = u.last_frame() - n_u + 1;

  InputTensor x(cfg.rows(), T);
  const auto put = [&](int col, const std::vector<double>& v) {
    for (int r = 0; r < cfg.rows(); ++r) x.at(r, col, 0) = v[static_cast<std::size_t>(r)];
  };
  for (int i = u.length() - n_u; i < u.length(); ++i) {
    const Detection& d = u.detections[static_cast<std::size_t>(i)];
    const int col = d.frame - origin;
    put(col, embed(d, meta, cfg.d_ap));
    for (int r = 0; r < cfg.rows(); ++r) x.at(r, col, 1) = 1.0;
  }
  const std::vector<double> a = embed(u.detections.back(), meta, cfg.d_ap);
  const std::vector<double> b = embed(w.detections.front(), meta, cfg.d_ap);
  for (int g = 1; g < gap; ++g) {
    const double s = static_cast<double>(g) / gap;
    std::vector<double> v(a.size());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = a[r] + s * (b[r] - a[r]);
    put(u.last_frame() + g - origin, v);
  }
  for (int i = 0; i < n_w; ++i) {
    const Detection& d = w.detections[static_cast<std::size_t>(i)];
    const int col = d.frame - origin;
    put(col, embed(d, meta, cfg.d_ap));
    for (int r = 0; r < cfg.rows(); ++r) x.at(r, col, 2) = 1.0;
  }
  return x;
}

template <typename Real>
double forward_logit(const InputTensor& x, const BasicNetWeights<Real>& w) {
  check_input(x, w.config);
  check_weights(w);
  Activations<Real> act;
  run_forward(to_real<Real>(x), w, act);
  return act.logit;
}

template <typename Real>
double forward(const InputTensor& x, const BasicNetWeights<Real>& w) {
  return sigmoid(forward_logit(x, w));
}

template <typename Real>
LossGradient<Real> loss_and_gradient(std::span<const LabeledInput> batch,
                                     const BasicNetWeights<Real>& w) {
  if (batch.empty()) fail(ErrorKind::kInvalidArgument, "empty training batch");
  check_weights(w);
  LossGradient<Real> out;
  out.grad = BasicNetWeights<Real>::zeros(w.config);
  out.probabilities.reserve(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Activations<Real> act;
  for (const LabeledInput& sample : batch) {
    check_input(sample.input, w.config);
    run_forward(to_real<Real>(sample.input), w, act);
    const double p = sigmoid(act.logit);
    out.probabilities.push_back(p);
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    const double y = sample.label != 0 ? 1.0 : 0.0;
    out.loss -= inv_n * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    // The clamp is flat outside its range, so the gradient vanishes there.
    const double g = (p == pc) ? (p - y) * inv_n : 0.0;
    if (g != 0.0) run_backward(act, w, static_cast<Real>(g), out.grad);
  }
  return out;
}

template double forward_logit<float>(const InputTensor&, const BasicNetWeights<float>&);
template double forward_logit<double>(const InputTensor&, const BasicNetWeights<double>&);
template double forward<float>(const InputTensor&, const BasicNetWeights<float>&);
template double forward<double>(const InputTensor&, const BasicNetWeights<double>&);
template LossGradient<float> loss_and_gradient<float>(std::span<const LabeledInput>,
                                                      const BasicNetWeights<float>&);
template LossGradient<double> loss_and_gradient<double>(std::span<const LabeledInput>,
                                                        const BasicNetWeights<double>&);

double connectivity(const Tracklet& u, const Tracklet& w, const NetWeights& wts,
                    const FrameMeta& meta) {
  if (time_overlap(u, w)) return 0.0;
  if (time_gap(u, w) >= wts.config.T) return 0.0;
  const bool u_first = u.first_frame() < w.first_frame();
  return forward(assemble_input(u_first ? u : w, u_first ? w : u, meta, wts.config), wts);
}

}  // namespace tnt
