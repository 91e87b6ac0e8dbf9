#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "freqboot/common.hpp"
#include "freqboot/kernels.hpp"
#include "freqboot/rng.hpp"
#include "freqboot/tensor.hpp"

// Trainable layers. Each layer owns its parameters and gradients, caches the
// activations of the last forward call, and exposes an explicit backward.
// Caches are single-slot: the training loop is strictly sequential
// (forward -> backward -> step), so one slot is enough. Gradients accumulate
// until zero_grad().

namespace freqboot::net {

template <class S>
struct Param {
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;

  void init_shape(std::string n, std::vector<long> shape) {
    name = std::move(n);
    value = Tensor<S>(shape);
    grad = Tensor<S>(std::move(shape));
  }
};

template <class S>
struct ParamRef {
  std::string name;
  Tensor<S>* value = nullptr;
  Tensor<S>* grad = nullptr;
};

template <class S>
struct BufferRef {
  std::string name;
  Tensor<S>* value = nullptr;
};

template <class S>
using ParamRefs = std::vector<ParamRef<S>>;
template <class S>
using BufferRefs = std::vector<BufferRef<S>>;

/// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
template <class S>
void uniform_fan_in_init(Tensor<S>& w, long fan_in, rng::Stream& rs) {
  const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
  for (long i = 0; i < w.size(); ++i)
    w[i] = static_cast<S>((rs.uniform() * 2.0 - 1.0) * bound);
}

// ---------------------------------------------------------------------------

template <class S>
class Conv1d {
 public:
  Conv1d() = default;

  /// General 1-D convolution, stride 1. `pad_left`/`pad_right` are implicit
  /// zero padding; with dilation d and kernel K the output length is
  /// T + pad_left + pad_right - d*(K-1).
  Conv1d(std::string name, long c_in, long c_out, long k, long dilation, long pad_left,
         long pad_right, rng::Stream& rs)
      : c_in_(c_in), c_out_(c_out), k_(k), dil_(dilation), pad_l_(pad_left), pad_r_(pad_right) {
    w_.init_shape(name + ".weight", {c_out, c_in, k});
    b_.init_shape(name + ".bias", {c_out});
    uniform_fan_in_init(w_.value, c_in * k, rs);
    uniform_fan_in_init(b_.value, c_in * k, rs);
  }

  static Conv1d same_padded(std::string name, long c_in, long c_out, long k, rng::Stream& rs) {
    const long pad_l = (k - 1) / 2;
    return Conv1d(std::move(name), c_in, c_out, k, 1, pad_l, (k - 1) - pad_l, rs);
  }

  static Conv1d causal(std::string name, long c_in, long c_out, long k, long dilation,
                       rng::Stream& rs) {
    return Conv1d(std::move(name), c_in, c_out, k, dilation, dilation * (k - 1), 0, rs);
  }

  long out_len(long t_in) const { return t_in + pad_l_ + pad_r_ - dil_ * (k_ - 1); }
  long in_channels() const { return c_in_; }
  long out_channels() const { return c_out_; }
  long kernel() const { return k_; }

  Tensor<S> forward(const Tensor<S>& x, bool record = true) {
    const long b = x.dim(0), t = x.dim(2);
    const long t_out = out_len(t);
    Tensor<S> y({b, c_out_, t_out});
    kernels::conv1d_forward(x.data(), b, c_in_, t, w_.value.data(), b_.value.data(), c_out_, k_,
                            dil_, pad_l_, y.data(), t_out);
    if (record) x_cache_ = x;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const long b = dy.dim(0), t_out = dy.dim(2);
    const long t = x_cache_.dim(2);
    kernels::conv1d_backward_params(dy.data(), b, c_out_, t_out, x_cache_.data(), c_in_, t, k_,
                                    dil_, pad_l_, w_.grad.data(), b_.grad.data());
    Tensor<S> dx({b, c_in_, t});
    kernels::conv1d_backward_input(dy.data(), b, c_out_, t_out, w_.value.data(), c_in_, k_, dil_,
                                   pad_l_, dx.data(), t);
    return dx;
  }

  void collect(ParamRefs<S>& out) {
    out.push_back({w_.name, &w_.value, &w_.grad});
    out.push_back({b_.name, &b_.value, &b_.grad});
  }

  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

 private:
  long c_in_ = 0, c_out_ = 0, k_ = 0, dil_ = 1, pad_l_ = 0, pad_r_ = 0;
  Param<S> w_, b_;
  Tensor<S> x_cache_;
};

// ---------------------------------------------------------------------------

/// Batch normalization over (batch, time) per channel. Accepts [B, C, T] or
/// [B, C] (treated as T = 1). Running statistics follow the usual momentum
/// update with the unbiased batch variance; they never receive gradients.
template <class S>
class BatchNorm1d {
 public:
  BatchNorm1d() = default;

  BatchNorm1d(std::string name, long c, S momentum = S(0.1), S eps = S(1e-5))
      : c_(c), momentum_(momentum), eps_(eps) {
    gamma_.init_shape(name + ".gamma", {c});
    beta_.init_shape(name + ".beta", {c});
    gamma_.value.fill(S(1));
    running_mean_name_ = name + ".running_mean";
    running_var_name_ = name + ".running_var";
    running_mean_ = Tensor<S>({c});
    running_var_ = Tensor<S>({c});
    running_var_.fill(S(1));
  }

  /// `training` selects batch statistics; `update_running` folds them into
  /// the running estimates (kept separate so that loss probes and gradient
  /// checks do not mutate state).
  Tensor<S> forward(const Tensor<S>& x, bool training, bool update_running) {
    const bool rank3 = x.rank() == 3;
    const long b = x.dim(0);
    const long t = rank3 ? x.dim(2) : 1;
    if (x.dim(1) != c_) throw StateError("batchnorm: channel mismatch " + x.shape_str());
    Tensor<S> y(x.shape());
    if (training) {
      Tensor<S> mean({c_}), var({c_});
      kernels::channel_stats(x.data(), b, c_, t, mean.data(), var.data());
      invstd_ = Tensor<S>({c_});
      for (long c = 0; c < c_; ++c)
        invstd_[c] = S(1) / std::sqrt(var[c] + eps_);
      xhat_ = Tensor<S>(x.shape());
      kernels::bn_normalize(x.data(), b, c_, t, mean.data(), invstd_.data(), gamma_.value.data(),
                            beta_.value.data(), y.data(), xhat_.data());
      train_mode_cache_ = true;
      if (update_running) {
        const double n = static_cast<double>(b) * static_cast<double>(t);
        const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
        for (long c = 0; c < c_; ++c) {
          running_mean_[c] = (S(1) - momentum_) * running_mean_[c] + momentum_ * mean[c];
          running_var_[c] =
              (S(1) - momentum_) * running_var_[c] + momentum_ * static_cast<S>(var[c] * unbias);
        }
      }
    } else {
      invstd_ = Tensor<S>({c_});
      for (long c = 0; c < c_; ++c)
        invstd_[c] = S(1) / std::sqrt(running_var_[c] + eps_);
      kernels::bn_normalize(x.data(), b, c_, t, running_mean_.data(), invstd_.data(),
                            gamma_.value.data(), beta_.value.data(), y.data(),
                            static_cast<S*>(nullptr));
      train_mode_cache_ = false;
    }
    b_cache_ = b;
    t_cache_ = t;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(dy.shape());
    if (train_mode_cache_) {
      kernels::bn_backward(dy.data(), xhat_.data(), b_cache_, c_, t_cache_, gamma_.value.data(),
                           invstd_.data(), dx.data(), gamma_.grad.data(), beta_.grad.data());
    } else {
      kernels::bn_backward_affine(dy.data(), b_cache_, c_, t_cache_, gamma_.value.data(),
                                  invstd_.data(), dx.data());
    }
    return dx;
  }

  void collect(ParamRefs<S>& params, BufferRefs<S>& buffers) {
    params.push_back({gamma_.name, &gamma_.value, &gamma_.grad});
    params.push_back({beta_.name, &beta_.value, &beta_.grad});
    buffers.push_back({running_mean_name_, &running_mean_});
    buffers.push_back({running_var_name_, &running_var_});
  }

  Param<S>& gamma() { return gamma_; }
  Param<S>& beta() { return beta_; }
  Tensor<S>& running_mean() { return running_mean_; }
  Tensor<S>& running_var() { return running_var_; }

 private:
  long c_ = 0;
  S momentum_ = S(0.1), eps_ = S(1e-5);
  Param<S> gamma_, beta_;
  std::string running_mean_name_, running_var_name_;
  Tensor<S> running_mean_, running_var_;
  // forward cache
  Tensor<S> xhat_, invstd_;
  long b_cache_ = 0, t_cache_ = 0;
  bool train_mode_cache_ = false;
};

// ---------------------------------------------------------------------------

template <class S>
class Relu {
 public:
  Tensor<S> forward(const Tensor<S>& x, bool record = true) {
    Tensor<S> y(x.shape());
    kernels::relu_forward(x.data(), x.size(), y.data());
    if (record) x_cache_ = x;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(dy.shape());
    kernels::relu_backward(x_cache_.data(), dy.data(), dy.size(), dx.data());
    return dx;
  }

 private:
  Tensor<S> x_cache_;
};

// ---------------------------------------------------------------------------

template <class S>
class MaxPool1d {
 public:
  MaxPool1d() = default;
  MaxPool1d(long size, long stride) : size_(size), stride_(stride) {}

  long out_len(long t_in) const { return (t_in - size_) / stride_ + 1; }

  Tensor<S> forward(const Tensor<S>& x, bool record = true) {
    const long b = x.dim(0), c = x.dim(1), t = x.dim(2);
    if (t < size_)
      throw StateError("maxpool: input length " + std::to_string(t) + " shorter than window");
    const long t_out = out_len(t);
    Tensor<S> y({b, c, t_out});
    Tensor<long> argmax({b, c, t_out});
    kernels::maxpool1d_forward(x.data(), b, c, t, size_, stride_, y.data(), argmax.data(), t_out);
    if (record) {
      argmax_ = std::move(argmax);
      t_in_cache_ = t;
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const long b = dy.dim(0), c = dy.dim(1), t_out = dy.dim(2);
    Tensor<S> dx({b, c, t_in_cache_});
    kernels::maxpool1d_backward(dy.data(), argmax_.data(), b, c, t_out, dx.data(), t_in_cache_);
    return dx;
  }

 private:
  long size_ = 2, stride_ = 2;
  Tensor<long> argmax_;
  long t_in_cache_ = 0;
};

// ---------------------------------------------------------------------------

/// Inverted dropout; identity in eval mode. The mask is drawn serially from
/// the provided stream so RNG consumption is independent of threading.
template <class S>
class Dropout {
 public:
  Dropout() = default;
  explicit Dropout(double p) : p_(p) {
    if (p_ < 0.0 || p_ >= 1.0) throw ConfigError("dropout probability must be in [0,1)");
  }

  Tensor<S> forward(const Tensor<S>& x, bool training, rng::Stream* rs) {
    if (!training || p_ == 0.0) {
      active_ = false;
      return x;
    }
    if (!rs) throw StateError("dropout: training forward requires an RNG stream");
    const S scale = static_cast<S>(1.0 / (1.0 - p_));
    mask_ = Tensor<S>(x.shape());
    for (long i = 0; i < mask_.size(); ++i)
      mask_[i] = rs->uniform() < p_ ? S(0) : scale;
    Tensor<S> y(x.shape());
    kernels::mul(x.data(), mask_.data(), x.size(), y.data());
    active_ = true;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (!active_) return dy;
    Tensor<S> dx(dy.shape());
    kernels::mul(dy.data(), mask_.data(), dy.size(), dx.data());
    return dx;
  }

 private:
  double p_ = 0.0;
  Tensor<S> mask_;
  bool active_ = false;
};

// ---------------------------------------------------------------------------

template <class S>
class Linear {
 public:
  Linear() = default;

  Linear(std::string name, long in, long out, rng::Stream& rs) : in_(in), out_(out) {
    w_.init_shape(name + ".weight", {out, in});
    b_.init_shape(name + ".bias", {out});
    uniform_fan_in_init(w_.value, in, rs);
    uniform_fan_in_init(b_.value, in, rs);
  }

  long in_features() const { return in_; }
  long out_features() const { return out_; }

  Tensor<S> forward(const Tensor<S>& x, bool record = true) {
    const long b = x.dim(0);
    Tensor<S> y({b, out_});
    kernels::linear_forward(x.data(), b, in_, w_.value.data(), b_.value.data(), out_, y.data());
    if (record) x_cache_ = x;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const long b = dy.dim(0);
    kernels::linear_backward_params(dy.data(), b, out_, x_cache_.data(), in_, w_.grad.data(),
                                    b_.grad.data());
    Tensor<S> dx({b, in_});
    kernels::linear_backward_input(dy.data(), b, out_, w_.value.data(), in_, dx.data());
    return dx;
  }

  void collect(ParamRefs<S>& out) {
    out.push_back({w_.name, &w_.value, &w_.grad});
    out.push_back({b_.name, &b_.value, &b_.grad});
  }

  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

 private:
  long in_ = 0, out_ = 0;
  Param<S> w_, b_;
  Tensor<S> x_cache_;
};

}  // namespace freqboot::net
