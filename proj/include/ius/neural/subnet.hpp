#pragma once
// Convolutional sub-network mapping one input map (or a small multi-channel
// image) to a single bounded response.
//
//   conv3x3(conv1) -> ReLU -> maxpool2 -> conv3x3(conv2) -> ReLU -> maxpool2
//   -> global average pool -> dense(dense_units) -> ReLU -> dense(1) -> head
//
// Convolutions use zero "same" padding and stride 1; pooling floors odd
// extents. The head is tanh for additive-model sub-networks and identity
// (a logit) for standalone classifiers.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ius/neural/tensor.hpp"

namespace ius::neural {

enum class Head { Tanh, Linear };

inline const char* to_string(Head h) { return h == Head::Tanh ? "tanh" : "linear"; }

struct Architecture {
  int in_channels = 1;
  int input_rows = 64;
  int input_cols = 64;
  int conv1_filters = 32;
  int conv2_filters = 64;
  int dense_units = 32;
  Head head = Head::Tanh;

  void validate() const {
    if (in_channels < 1 || conv1_filters < 1 || conv2_filters < 1 || dense_units < 1)
      fail(ErrorKind::Config, "architecture layer widths must be positive");
    if (input_rows < 4 || input_cols < 4)
      fail(ErrorKind::Config, "architecture input must be at least 4x4");
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

namespace detail {

// X: C x (H*W) -> columns: (C*9) x (H*W), zero padded.
template <typename T>
void im2col(const Matrix<T>& x, int rows, int cols, Matrix<T>& out) {
  const int channels = static_cast<int>(x.rows());
  out.resize(static_cast<Eigen::Index>(channels) * 9, static_cast<Eigen::Index>(rows) * cols);
  for (int y = 0; y < rows; ++y) {
    for (int xx = 0; xx < cols; ++xx) {
      T* col = out.col(y * cols + xx).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xx + kx - 1;
          const bool inside = sy >= 0 && sy < rows && sx >= 0 && sx < cols;
          const int src = sy * cols + sx;
          for (int c = 0; c < channels; ++c) col[c * 9 + ky * 3 + kx] = inside ? x(c, src) : T(0);
        }
      }
    }
  }
}

// Adjoint of im2col.
template <typename T>
void col2im(const Matrix<T>& columns, int channels, int rows, int cols, Matrix<T>& out) {
  out.setZero(channels, static_cast<Eigen::Index>(rows) * cols);
  for (int y = 0; y < rows; ++y) {
    for (int xx = 0; xx < cols; ++xx) {
      const T* col = columns.col(y * cols + xx).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= rows) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = xx + kx - 1;
          if (sx < 0 || sx >= cols) continue;
          const int dst = sy * cols + sx;
          for (int c = 0; c < channels; ++c) out(c, dst) += col[c * 9 + ky * 3 + kx];
        }
      }
    }
  }
}

// 2x2 stride-2 max pooling; records the flat source index of each maximum.
template <typename T>
void maxpool(const Matrix<T>& x, int rows, int cols, Matrix<T>& out, std::vector<int>& argmax) {
  const int pr = rows / 2, pc = cols / 2;
  const int channels = static_cast<int>(x.rows());
  out.resize(channels, static_cast<Eigen::Index>(pr) * pc);
  argmax.resize(static_cast<std::size_t>(channels) * pr * pc);
  for (int i = 0; i < pr; ++i) {
    for (int j = 0; j < pc; ++j) {
      const int p = i * pc + j;
      const int base = 2 * i * cols + 2 * j;
      const int cand[4] = {base, base + 1, base + cols, base + cols + 1};
      for (int c = 0; c < channels; ++c) {
        int best = cand[0];
        T value = x(c, best);
        for (int k = 1; k < 4; ++k) {
          if (x(c, cand[k]) > value) {
            value = x(c, cand[k]);
            best = cand[k];
          }
        }
        out(c, p) = value;
        argmax[static_cast<std::size_t>(p) * channels + c] = best;
      }
    }
  }
}

template <typename T>
void unpool(const Matrix<T>& grad, const std::vector<int>& argmax, int rows, int cols,
            Matrix<T>& out) {
  const int channels = static_cast<int>(grad.rows());
  out.setZero(channels, static_cast<Eigen::Index>(rows) * cols);
  for (Eigen::Index p = 0; p < grad.cols(); ++p)
    for (int c = 0; c < channels; ++c)
      out(c, argmax[static_cast<std::size_t>(p) * channels + c]) += grad(c, p);
}

}  // namespace detail

// Intermediates kept by forward() for backward().
template <typename T>
struct SubnetTrace {
  int rows0 = 0, cols0 = 0, rows1 = 0, cols1 = 0, rows2 = 0, cols2 = 0;
  Matrix<T> columns1, act1, pool1;
  std::vector<int> argmax1;
  Matrix<T> columns2, act2, pool2;
  std::vector<int> argmax2;
  Vector<T> pooled;  // global average
  Vector<T> hidden;  // post-ReLU dense1
  T logit = 0;
  T output = 0;
};

template <typename T>
class SubNetwork {
 public:
  using Scalar = T;

  SubNetwork() = default;

  explicit SubNetwork(const Architecture& arch) : arch_(arch) {
    arch_.validate();
    conv1_weight = ParamTensor<T>({arch.conv1_filters, arch.in_channels, 3, 3});
    conv1_bias = ParamTensor<T>({arch.conv1_filters});
    conv2_weight = ParamTensor<T>({arch.conv2_filters, arch.conv1_filters, 3, 3});
    conv2_bias = ParamTensor<T>({arch.conv2_filters});
    dense1_weight = ParamTensor<T>({arch.dense_units, arch.conv2_filters});
    dense1_bias = ParamTensor<T>({arch.dense_units});
    dense2_weight = ParamTensor<T>({1, arch.dense_units});
    dense2_bias = ParamTensor<T>({1});
  }

  const Architecture& architecture() const noexcept { return arch_; }

  // He-uniform for ReLU layers, Xavier-uniform for the output layer, zero biases.
  template <typename Rng>
  void initialize(Rng& rng) {
    auto fill_uniform = [&rng](ParamTensor<T>& t, double limit) {
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (auto& v : t.data) v = static_cast<T>(dist(rng));
    };
    fill_uniform(conv1_weight, std::sqrt(6.0 / (arch_.in_channels * 9)));
    fill_uniform(conv2_weight, std::sqrt(6.0 / (arch_.conv1_filters * 9)));
    fill_uniform(dense1_weight, std::sqrt(6.0 / arch_.conv2_filters));
    fill_uniform(dense2_weight, std::sqrt(6.0 / (arch_.dense_units + 1)));
    for (auto* b : {&conv1_bias, &conv2_bias, &dense1_bias, &dense2_bias})
      std::fill(b->data.begin(), b->data.end(), T(0));
  }

  template <typename F>
  void for_each_tensor(F&& visit) { visit_all(*this, visit); }
  template <typename F>
  void for_each_tensor(F&& visit) const { visit_all(*this, visit); }

  // A zero-valued network with identical shapes, used as a gradient buffer.
  SubNetwork zeros_like() const {
    SubNetwork out(arch_);
    return out;
  }

  template <typename U>
  SubNetwork<U> cast() const {
    SubNetwork<U> out(arch_);
    out.conv1_weight = conv1_weight.template cast<U>();
    out.conv1_bias = conv1_bias.template cast<U>();
    out.conv2_weight = conv2_weight.template cast<U>();
    out.conv2_bias = conv2_bias.template cast<U>();
    out.dense1_weight = dense1_weight.template cast<U>();
    out.dense1_bias = dense1_bias.template cast<U>();
    out.dense2_weight = dense2_weight.template cast<U>();
    out.dense2_bias = dense2_bias.template cast<U>();
    return out;
  }

  // input: in_channels x (rows*cols)
  T forward(const Matrix<T>& input, SubnetTrace<T>& trace) const {
    if (input.rows() != arch_.in_channels ||
        input.cols() != static_cast<Eigen::Index>(arch_.input_rows) * arch_.input_cols)
      fail(ErrorKind::Shape, "sub-network expects " + std::to_string(arch_.in_channels) + "x" +
                                 std::to_string(arch_.input_rows) + "x" +
                                 std::to_string(arch_.input_cols) + " input");
    auto& t = trace;
    t.rows0 = arch_.input_rows;
    t.cols0 = arch_.input_cols;
    t.rows1 = t.rows0 / 2;
    t.cols1 = t.cols0 / 2;
    t.rows2 = t.rows1 / 2;
    t.cols2 = t.cols1 / 2;

    detail::im2col(input, t.rows0, t.cols0, t.columns1);
    t.act1.noalias() = conv1_weight.as_matrix() * t.columns1;
    t.act1.colwise() += conv1_bias.as_vector();
    t.act1 = t.act1.cwiseMax(T(0));
    detail::maxpool(t.act1, t.rows0, t.cols0, t.pool1, t.argmax1);

    detail::im2col(t.pool1, t.rows1, t.cols1, t.columns2);
    t.act2.noalias() = conv2_weight.as_matrix() * t.columns2;
    t.act2.colwise() += conv2_bias.as_vector();
    t.act2 = t.act2.cwiseMax(T(0));
    detail::maxpool(t.act2, t.rows1, t.cols1, t.pool2, t.argmax2);

    t.pooled = t.pool2.rowwise().mean();
    t.hidden = (dense1_weight.as_matrix() * t.pooled + dense1_bias.as_vector()).cwiseMax(T(0));
    t.logit = (dense2_weight.as_matrix() * t.hidden)(0) + dense2_bias.data[0];
    if (arch_.head == Head::Tanh) {
      // Keep responses strictly inside (-1, 1) even where tanh rounds to +-1.
      const T bound = std::nextafter(T(1), T(0));
      t.output = std::clamp(std::tanh(t.logit), -bound, bound);
    } else {
      t.output = t.logit;
    }
    if (!std::isfinite(t.output)) fail(ErrorKind::Numeric, "non-finite sub-network response");
    return t.output;
  }

  T forward(const Matrix<T>& input) const {
    SubnetTrace<T> trace;
    return forward(input, trace);
  }

  // Accumulates d(loss)/d(params) into grads given d(loss)/d(output).
  void backward(const SubnetTrace<T>& t, T grad_output, SubNetwork& grads) const {
    const T grad_logit =
        arch_.head == Head::Tanh ? grad_output * (T(1) - t.output * t.output) : grad_output;

    grads.dense2_weight.as_vector() += grad_logit * t.hidden;
    grads.dense2_bias.data[0] += grad_logit;

    Vector<T> grad_hidden = grad_logit * dense2_weight.as_matrix().row(0).transpose();
    for (Eigen::Index i = 0; i < grad_hidden.size(); ++i)
      if (t.hidden[i] <= T(0)) grad_hidden[i] = T(0);

    grads.dense1_weight.as_matrix().noalias() += grad_hidden * t.pooled.transpose();
    grads.dense1_bias.as_vector() += grad_hidden;
    const Vector<T> grad_pooled = dense1_weight.as_matrix().transpose() * grad_hidden;

    const auto pool2_count = static_cast<T>(t.pool2.cols());
    Matrix<T> grad_pool2 = (grad_pooled / pool2_count).replicate(1, t.pool2.cols());
    Matrix<T> grad_act2;
    detail::unpool(grad_pool2, t.argmax2, t.rows1, t.cols1, grad_act2);
    grad_act2 = (t.act2.array() > T(0)).select(grad_act2, T(0));

    grads.conv2_weight.as_matrix().noalias() += grad_act2 * t.columns2.transpose();
    grads.conv2_bias.as_vector() += grad_act2.rowwise().sum();
    Matrix<T> grad_columns2;
    grad_columns2.noalias() = conv2_weight.as_matrix().transpose() * grad_act2;
    Matrix<T> grad_pool1;
    detail::col2im(grad_columns2, arch_.conv1_filters, t.rows1, t.cols1, grad_pool1);

    Matrix<T> grad_act1;
    detail::unpool(grad_pool1, t.argmax1, t.rows0, t.cols0, grad_act1);
    grad_act1 = (t.act1.array() > T(0)).select(grad_act1, T(0));

    grads.conv1_weight.as_matrix().noalias() += grad_act1 * t.columns1.transpose();
    grads.conv1_bias.as_vector() += grad_act1.rowwise().sum();
  }

  bool finite() const {
    bool ok = true;
    for_each_tensor([&ok](const std::string&, const ParamTensor<T>& p) {
      ok = ok && all_finite<T>(p.span());
    });
    return ok;
  }

  friend bool operator==(const SubNetwork&, const SubNetwork&) = default;

  ParamTensor<T> conv1_weight, conv1_bias, conv2_weight, conv2_bias;
  ParamTensor<T> dense1_weight, dense1_bias, dense2_weight, dense2_bias;

 private:
  template <typename Self, typename F>
  static void visit_all(Self& self, F& visit) {
    visit("conv1.weight", self.conv1_weight);
    visit("conv1.bias", self.conv1_bias);
    visit("conv2.weight", self.conv2_weight);
    visit("conv2.bias", self.conv2_bias);
    visit("dense1.weight", self.dense1_weight);
    visit("dense1.bias", self.dense1_bias);
    visit("dense2.weight", self.dense2_weight);
    visit("dense2.bias", self.dense2_bias);
  }

  Architecture arch_;
};

}  // namespace ius::neural
