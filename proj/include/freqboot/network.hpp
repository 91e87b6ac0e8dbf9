#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "freqboot/layers.hpp"

// Dual-branch network: a shared convolutional encoder feeding a TCN
// projection head (long-receptive-field branch) and an MLP projection head
// (short-window branch). The online copy carries one MLP-shaped predictor per
// head; the target copy has no predictors and is updated only by EMA.

namespace freqboot::net {

struct EncoderConfig {
  long blocks = 3;
  std::vector<long> kernel_sizes{25, 8, 8};
  std::vector<long> channels{32, 64, 128};
  long pool_size = 2;
  long pool_stride = 2;
  double dropout = 0.35;

  void validate() const {
    if (blocks < 1) throw ConfigError("encoder: blocks must be >= 1");
    if (static_cast<long>(kernel_sizes.size()) != blocks)
      throw ConfigError("encoder: kernel_sizes must have one entry per block");
    if (static_cast<long>(channels.size()) != blocks)
      throw ConfigError("encoder: channels must have one entry per block");
    for (long k : kernel_sizes)
      if (k < 1) throw ConfigError("encoder: kernel sizes must be positive");
    for (long c : channels)
      if (c < 1) throw ConfigError("encoder: channel counts must be positive");
    if (pool_size < 1 || pool_stride < 1) throw ConfigError("encoder: pool size/stride must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must be in [0,1)");
  }
};

struct TCNHeadConfig {
  long layers = 2;
  long kernel = 3;
  std::vector<long> dilations{4, 8};
  long hidden_dim = 256;
  long out_dim = 128;

  void validate() const {
    if (layers < 1) throw ConfigError("tcn head: layers must be >= 1");
    if (static_cast<long>(dilations.size()) != layers)
      throw ConfigError("tcn head: dilations must have one entry per layer");
    for (std::size_t i = 1; i < dilations.size(); ++i)
      if (dilations[i] <= dilations[i - 1])
        throw ConfigError("tcn head: dilations must be strictly increasing");
    for (long d : dilations)
      if (d < 1) throw ConfigError("tcn head: dilations must be positive");
    if (kernel < 1) throw ConfigError("tcn head: kernel must be >= 1");
    if (hidden_dim < 1 || out_dim < 1) throw ConfigError("tcn head: dims must be positive");
  }

  /// True when the head kernel is smaller than every encoder kernel and every
  /// dilation exceeds the head kernel (the ordering that wins the kernel/
  /// dilation comparison).
  bool ordering_constraint_ok(const EncoderConfig& enc) const {
    const long enc_min = *std::min_element(enc.kernel_sizes.begin(), enc.kernel_sizes.end());
    const long d_min = *std::min_element(dilations.begin(), dilations.end());
    return kernel < enc_min && d_min > kernel;
  }
};

struct MLPHeadConfig {
  long hidden_dim = 256;
  long out_dim = 128;

  void validate() const {
    if (hidden_dim < 1 || out_dim < 1) throw ConfigError("mlp head: dims must be positive");
  }
};

struct ModelConfig {
  EncoderConfig encoder;
  TCNHeadConfig tcn;
  MLPHeadConfig mlp;
  bool use_tcn_head = true;
  bool use_mlp_head = true;
  bool symmetrize_loss = false;
  double tau = 0.996;

  void validate() const {
    encoder.validate();
    if (use_tcn_head) tcn.validate();
    if (use_mlp_head) mlp.validate();
    if (!use_tcn_head && !use_mlp_head)
      throw ConfigError("model: at least one projection head must be enabled");
    if (tau < 0.0 || tau > 1.0) throw ConfigError("model: tau must be in [0,1]");
  }
};

/// 1 + sum_i (K-1) * D_i: the number of input timesteps that can influence
/// one output timestep of the dilated causal stack (one conv per block).
inline long receptive_field(const TCNHeadConfig& cfg) {
  long rf = 1;
  for (long d : cfg.dilations) rf += (cfg.kernel - 1) * d;
  return rf;
}

// ---------------------------------------------------------------------------

/// N blocks of {same-padded conv -> batch norm -> ReLU -> max pool ->
/// dropout}. Kernels are capped at the temporal length entering their block
/// so that short inputs remain admissible.
template <class S>
class Encoder {
 public:
  Encoder() = default;

  Encoder(const EncoderConfig& cfg, long in_channels, long in_len, rng::Stream& rs) : cfg_(cfg) {
    cfg.validate();
    in_channels_ = in_channels;
    in_len_ = in_len;
    long c = in_channels;
    long t = in_len;
    for (long i = 0; i < cfg.blocks; ++i) {
      if (t < 1)
        throw StateError("encoder: input length " + std::to_string(in_len) +
                         " is fully consumed by pooling before block " + std::to_string(i) +
                         "; use fewer blocks or a longer series");
      const long k_eff = std::min(cfg.kernel_sizes[i], t);
      effective_kernels_.push_back(k_eff);
      const std::string base = "block" + std::to_string(i);
      convs_.push_back(Conv1d<S>::same_padded(base + ".conv", c, cfg.channels[i], k_eff, rs));
      bns_.emplace_back(base + ".bn", cfg.channels[i]);
      relus_.emplace_back();
      if (t < cfg.pool_size)
        throw StateError("encoder: temporal length " + std::to_string(t) + " at block " +
                         std::to_string(i) + " is shorter than the pool window " +
                         std::to_string(cfg.pool_size));
      pools_.emplace_back(cfg.pool_size, cfg.pool_stride);
      drops_.emplace_back(cfg.dropout);
      c = cfg.channels[i];
      t = pools_.back().out_len(t);
    }
    out_channels_ = c;
    out_len_ = t;
  }

  long in_channels() const { return in_channels_; }
  long in_len() const { return in_len_; }
  long out_channels() const { return out_channels_; }
  long out_len() const { return out_len_; }
  long flat_dim() const { return out_channels_ * out_len_; }
  long effective_kernel(long block) const { return effective_kernels_[block]; }

  Tensor<S> forward(const Tensor<S>& x, bool training, bool update_running, rng::Stream* drop_rng) {
    if (x.rank() != 3 || x.dim(1) != in_channels_ || x.dim(2) != in_len_)
      throw StateError("encoder: expected input [B," + std::to_string(in_channels_) + "," +
                       std::to_string(in_len_) + "], got " + x.shape_str());
    Tensor<S> h = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      h = convs_[i].forward(h, training);
      h = bns_[i].forward(h, training, update_running);
      h = relus_[i].forward(h, training);
      h = pools_[i].forward(h, training);
      h = drops_[i].forward(h, training, drop_rng);
    }
    return h;
  }

  Tensor<S> backward(const Tensor<S>& dz) {
    Tensor<S> d = dz;
    for (long i = static_cast<long>(convs_.size()) - 1; i >= 0; --i) {
      d = drops_[i].backward(d);
      d = pools_[i].backward(d);
      d = relus_[i].backward(d);
      d = bns_[i].backward(d);
      d = convs_[i].backward(d);
    }
    return d;
  }

  void collect(const std::string& prefix, ParamRefs<S>& params, BufferRefs<S>& buffers) {
    ParamRefs<S> local;
    BufferRefs<S> local_buf;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      convs_[i].collect(local);
      bns_[i].collect(local, local_buf);
    }
    for (auto& p : local) params.push_back({prefix + p.name, p.value, p.grad});
    for (auto& b : local_buf) buffers.push_back({prefix + b.name, b.value});
  }

 private:
  EncoderConfig cfg_;
  long in_channels_ = 0, in_len_ = 0, out_channels_ = 0, out_len_ = 0;
  std::vector<long> effective_kernels_;
  std::vector<Conv1d<S>> convs_;
  std::vector<BatchNorm1d<S>> bns_;
  std::vector<Relu<S>> relus_;
  std::vector<MaxPool1d<S>> pools_;
  std::vector<Dropout<S>> drops_;
};

// ---------------------------------------------------------------------------

/// Projection head of stacked {batch norm -> ReLU -> dilated causal conv}
/// blocks with residual connections, followed by a linear projection of the
/// last-timestep features. Causal convolutions left-pad only, so the feature
/// at time t never sees inputs beyond t.
template <class S>
class TcnHead {
 public:
  TcnHead() = default;

  TcnHead(const TCNHeadConfig& cfg, long in_channels, rng::Stream& rs) : cfg_(cfg) {
    cfg.validate();
    long c = in_channels;
    for (long i = 0; i < cfg.layers; ++i) {
      const std::string base = "layer" + std::to_string(i);
      bns_.emplace_back(base + ".bn", c);
      relus_.emplace_back();
      convs_.push_back(
          Conv1d<S>::causal(base + ".conv", c, cfg.hidden_dim, cfg.kernel, cfg.dilations[i], rs));
      if (c != cfg.hidden_dim) {
        res_convs_.push_back(Conv1d<S>(base + ".res", c, cfg.hidden_dim, 1, 1, 0, 0, rs));
        has_res_conv_.push_back(true);
      } else {
        res_convs_.emplace_back();
        has_res_conv_.push_back(false);
      }
      c = cfg.hidden_dim;
    }
    proj_ = Linear<S>("proj", cfg.hidden_dim, cfg.out_dim, rs);
  }

  long out_dim() const { return cfg_.out_dim; }

  /// Per-timestep features of the block stack, before last-step projection.
  Tensor<S> forward_features(const Tensor<S>& x, bool training, bool update_running) {
    Tensor<S> h = x;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      Tensor<S> u = h;
      h = bns_[i].forward(h, training, update_running);
      h = relus_[i].forward(h, training);
      h = convs_[i].forward(h, training);
      if (has_res_conv_[i]) {
        Tensor<S> r = res_convs_[i].forward(u, training);
        kernels::add(h.data(), r.data(), h.size(), h.data());
      } else {
        kernels::add(h.data(), u.data(), h.size(), h.data());
      }
    }
    return h;
  }

  Tensor<S> forward(const Tensor<S>& x, bool training, bool update_running) {
    Tensor<S> feats = forward_features(x, training, update_running);
    const long b = feats.dim(0), c = feats.dim(1), t = feats.dim(2);
    t_cache_ = t;
    Tensor<S> last({b, c});
    for (long bi = 0; bi < b; ++bi)
      for (long ci = 0; ci < c; ++ci) last.at2(bi, ci) = feats.at3(bi, ci, t - 1);
    return proj_.forward(last, training);
  }

  Tensor<S> backward(const Tensor<S>& d_out) {
    Tensor<S> dlast = proj_.backward(d_out);
    const long b = dlast.dim(0), c = dlast.dim(1);
    Tensor<S> d({b, c, t_cache_});
    for (long bi = 0; bi < b; ++bi)
      for (long ci = 0; ci < c; ++ci) d.at3(bi, ci, t_cache_ - 1) = dlast.at2(bi, ci);
    for (long i = static_cast<long>(convs_.size()) - 1; i >= 0; --i) {
      Tensor<S> du_res = has_res_conv_[i] ? res_convs_[i].backward(d) : d;
      Tensor<S> du = convs_[i].backward(d);
      du = relus_[i].backward(du);
      du = bns_[i].backward(du);
      kernels::add(du.data(), du_res.data(), du.size(), du.data());
      d = std::move(du);
    }
    return d;
  }

  void collect(const std::string& prefix, ParamRefs<S>& params, BufferRefs<S>& buffers) {
    ParamRefs<S> local;
    BufferRefs<S> local_buf;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      bns_[i].collect(local, local_buf);
      convs_[i].collect(local);
      if (has_res_conv_[i]) res_convs_[i].collect(local);
    }
    proj_.collect(local);
    for (auto& p : local) params.push_back({prefix + p.name, p.value, p.grad});
    for (auto& b : local_buf) buffers.push_back({prefix + b.name, b.value});
  }

  const TCNHeadConfig& config() const { return cfg_; }

  // test hooks
  std::vector<Conv1d<S>>& convs() { return convs_; }
  std::vector<Conv1d<S>>& res_convs() { return res_convs_; }
  std::vector<BatchNorm1d<S>>& bns() { return bns_; }

 private:
  TCNHeadConfig cfg_;
  std::vector<BatchNorm1d<S>> bns_;
  std::vector<Relu<S>> relus_;
  std::vector<Conv1d<S>> convs_;
  std::vector<Conv1d<S>> res_convs_;
  std::vector<bool> has_res_conv_;
  Linear<S> proj_;
  long t_cache_ = 0;
};

// ---------------------------------------------------------------------------

/// linear -> batch norm -> ReLU -> linear on flat feature vectors. Used for
/// the MLP projection head and for both predictors.
template <class S>
class MlpHead {
 public:
  MlpHead() = default;

  MlpHead(const std::string& name, long in, long hidden, long out, rng::Stream& rs) {
    if (in < 1 || hidden < 1 || out < 1) throw ConfigError("mlp: dims must be positive");
    l1_ = Linear<S>(name + ".fc1", in, hidden, rs);
    bn_ = BatchNorm1d<S>(name + ".bn", hidden);
    l2_ = Linear<S>(name + ".fc2", hidden, out, rs);
  }

  long out_dim() const { return l2_.out_features(); }
  long in_dim() const { return l1_.in_features(); }

  Tensor<S> forward(const Tensor<S>& x, bool training, bool update_running) {
    Tensor<S> h = l1_.forward(x, training);
    h = bn_.forward(h, training, update_running);
    h = relu_.forward(h, training);
    return l2_.forward(h, training);
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> d = l2_.backward(dy);
    d = relu_.backward(d);
    d = bn_.backward(d);
    return l1_.backward(d);
  }

  void collect(const std::string& prefix, ParamRefs<S>& params, BufferRefs<S>& buffers) {
    ParamRefs<S> local;
    BufferRefs<S> local_buf;
    l1_.collect(local);
    bn_.collect(local, local_buf);
    l2_.collect(local);
    for (auto& p : local) params.push_back({prefix + p.name, p.value, p.grad});
    for (auto& b : local_buf) buffers.push_back({prefix + b.name, b.value});
  }

  Linear<S>& fc1() { return l1_; }
  Linear<S>& fc2() { return l2_; }
  BatchNorm1d<S>& bn() { return bn_; }

 private:
  Linear<S> l1_;
  BatchNorm1d<S> bn_;
  Relu<S> relu_;
  Linear<S> l2_;
};

// ---------------------------------------------------------------------------

template <class S>
struct HeadOutputs {
  Tensor<S> z;         // encoder representation [B, C_enc, T_enc]
  Tensor<S> tcn_proj;  // [B, d_tcn], empty when the head is disabled
  Tensor<S> mlp_proj;  // [B, d_mlp]
  Tensor<S> tcn_pred;  // online branch only
  Tensor<S> mlp_pred;  // online branch only
};

/// Encoder plus the enabled projection heads (one branch of the dual model).
template <class S>
class BranchNet {
 public:
  BranchNet() = default;

  BranchNet(const ModelConfig& cfg, long in_channels, long in_len, rng::Stream& rs)
      : use_tcn_(cfg.use_tcn_head), use_mlp_(cfg.use_mlp_head) {
    encoder_ = Encoder<S>(cfg.encoder, in_channels, in_len, rs);
    if (use_tcn_) tcn_ = TcnHead<S>(cfg.tcn, encoder_.out_channels(), rs);
    if (use_mlp_)
      mlp_ = MlpHead<S>("mlp_proj", encoder_.flat_dim(), cfg.mlp.hidden_dim, cfg.mlp.out_dim, rs);
  }

  HeadOutputs<S> forward(const Tensor<S>& x, bool training, bool update_running,
                         rng::Stream* drop_rng) {
    HeadOutputs<S> out;
    out.z = encoder_.forward(x, training, update_running, drop_rng);
    if (use_tcn_) out.tcn_proj = tcn_->forward(out.z, training, update_running);
    if (use_mlp_) {
      const long b = out.z.dim(0);
      Tensor<S> flat = out.z.reshaped({b, encoder_.flat_dim()});
      out.mlp_proj = mlp_->forward(flat, training, update_running);
    }
    return out;
  }

  /// Backward from head-output gradients down through the encoder; returns
  /// the input gradient. Pass empty tensors for disabled heads.
  Tensor<S> backward(const Tensor<S>& d_tcn_proj, const Tensor<S>& d_mlp_proj, long batch) {
    Tensor<S> dz({batch, encoder_.out_channels(), encoder_.out_len()});
    if (use_tcn_ && !d_tcn_proj.empty()) {
      Tensor<S> d = tcn_->backward(d_tcn_proj);
      kernels::add(dz.data(), d.data(), dz.size(), dz.data());
    }
    if (use_mlp_ && !d_mlp_proj.empty()) {
      Tensor<S> dflat = mlp_->backward(d_mlp_proj);
      Tensor<S> d = dflat.reshaped({batch, encoder_.out_channels(), encoder_.out_len()});
      kernels::add(dz.data(), d.data(), dz.size(), dz.data());
    }
    return encoder_.backward(dz);
  }

  void collect(const std::string& prefix, ParamRefs<S>& params, BufferRefs<S>& buffers) {
    encoder_.collect(prefix + "encoder.", params, buffers);
    if (use_tcn_) tcn_->collect(prefix + "tcn_proj.", params, buffers);
    if (use_mlp_) mlp_->collect(prefix + "mlp_proj.", params, buffers);
  }

  Encoder<S>& encoder() { return encoder_; }
  bool has_tcn() const { return use_tcn_; }
  bool has_mlp() const { return use_mlp_; }
  TcnHead<S>& tcn() { return *tcn_; }
  MlpHead<S>& mlp() { return *mlp_; }

 private:
  bool use_tcn_ = true, use_mlp_ = true;
  Encoder<S> encoder_;
  std::optional<TcnHead<S>> tcn_;
  std::optional<MlpHead<S>> mlp_;
};

// ---------------------------------------------------------------------------

/// Online parameters (gradient-trained, with predictors) and target
/// parameters (EMA-tracked, no predictors). The target tree never receives
/// gradients; it changes only through ema_update.
template <class S>
class DualNetworkState {
 public:
  DualNetworkState() = default;

  DualNetworkState(const ModelConfig& cfg, long in_channels, long in_len, std::uint64_t seed)
      : cfg_(cfg) {
    cfg.validate();
    rng::Stream init(rng::mix(seed, "init"));
    online_ = BranchNet<S>(cfg, in_channels, in_len, init);
    if (cfg.use_tcn_head)
      tcn_pred_ = MlpHead<S>("tcn_pred", cfg.tcn.out_dim, cfg.tcn.hidden_dim, cfg.tcn.out_dim, init);
    if (cfg.use_mlp_head)
      mlp_pred_ = MlpHead<S>("mlp_pred", cfg.mlp.out_dim, cfg.mlp.hidden_dim, cfg.mlp.out_dim, init);
    target_ = online_;  // target starts as a copy of the online branch
  }

  const ModelConfig& config() const { return cfg_; }
  double tau() const { return cfg_.tau; }
  void set_tau(double t) { cfg_.tau = t; }

  HeadOutputs<S> forward_online(const Tensor<S>& x, bool training, rng::Stream* drop_rng,
                                bool update_running = true) {
    HeadOutputs<S> out = online_.forward(x, training, training && update_running, drop_rng);
    if (online_.has_tcn())
      out.tcn_pred = tcn_pred_->forward(out.tcn_proj, training, training && update_running);
    if (online_.has_mlp())
      out.mlp_pred = mlp_pred_->forward(out.mlp_proj, training, training && update_running);
    return out;
  }

  /// Target forward is evaluation-style: batch norm runs on the target's own
  /// running statistics and dropout is inactive, so the regression targets
  /// are a deterministic function of the target parameters.
  HeadOutputs<S> forward_target(const Tensor<S>& x) {
    return target_.forward(x, /*training=*/false, /*update_running=*/false, nullptr);
  }

  /// Backward from prediction gradients; returns the input gradient.
  Tensor<S> backward_online(const Tensor<S>& d_tcn_pred, const Tensor<S>& d_mlp_pred, long batch) {
    Tensor<S> d_tcn_proj, d_mlp_proj;
    if (online_.has_tcn() && !d_tcn_pred.empty()) d_tcn_proj = tcn_pred_->backward(d_tcn_pred);
    if (online_.has_mlp() && !d_mlp_pred.empty()) d_mlp_proj = mlp_pred_->backward(d_mlp_pred);
    return online_.backward(d_tcn_proj, d_mlp_proj, batch);
  }

  /// eps <- tau * eps + (1 - tau) * theta, elementwise over the target's
  /// parameters and batch-norm running statistics.
  void ema_update() {
    ParamRefs<S> po, pt;
    BufferRefs<S> bo, bt;
    online_.collect("", po, bo);
    target_.collect("", pt, bt);
    if (po.size() != pt.size() || bo.size() != bt.size())
      throw StateError("ema_update: online/target trees differ in structure");
    const S tau = static_cast<S>(cfg_.tau);
    for (std::size_t i = 0; i < po.size(); ++i) {
      if (!po[i].value->same_shape(*pt[i].value))
        throw StateError("ema_update: shape mismatch at " + po[i].name);
      S* t = pt[i].value->data();
      const S* o = po[i].value->data();
      const long n = po[i].value->size();
      for (long j = 0; j < n; ++j) t[j] = tau * t[j] + (S(1) - tau) * o[j];
    }
    for (std::size_t i = 0; i < bo.size(); ++i) {
      if (!bo[i].value->same_shape(*bt[i].value))
        throw StateError("ema_update: buffer shape mismatch at " + bo[i].name);
      S* t = bt[i].value->data();
      const S* o = bo[i].value->data();
      const long n = bo[i].value->size();
      for (long j = 0; j < n; ++j) t[j] = tau * t[j] + (S(1) - tau) * o[j];
    }
  }

  /// Everything the optimizer trains: online encoder, projection heads, and
  /// predictors. The target tree is deliberately not reachable from here.
  ParamRefs<S> trainable_params() {
    ParamRefs<S> p;
    BufferRefs<S> b;
    online_.collect("online.", p, b);
    if (online_.has_tcn()) tcn_pred_->collect("online.tcn_pred.", p, b);
    if (online_.has_mlp()) mlp_pred_->collect("online.mlp_pred.", p, b);
    return p;
  }

  ParamRefs<S> target_params() {
    ParamRefs<S> p;
    BufferRefs<S> b;
    target_.collect("target.", p, b);
    return p;
  }

  /// Full named state (params + buffers of both trees), for checkpointing.
  void collect_state(ParamRefs<S>& params, BufferRefs<S>& buffers) {
    online_.collect("online.", params, buffers);
    if (online_.has_tcn()) tcn_pred_->collect("online.tcn_pred.", params, buffers);
    if (online_.has_mlp()) mlp_pred_->collect("online.mlp_pred.", params, buffers);
    target_.collect("target.", params, buffers);
  }

  void zero_grad() {
    for (auto& p : trainable_params()) p.grad->zero();
  }

  BranchNet<S>& online() { return online_; }
  BranchNet<S>& target() { return target_; }
  MlpHead<S>& tcn_predictor() { return *tcn_pred_; }
  MlpHead<S>& mlp_predictor() { return *mlp_pred_; }

 private:
  ModelConfig cfg_;
  BranchNet<S> online_;
  std::optional<MlpHead<S>> tcn_pred_;
  std::optional<MlpHead<S>> mlp_pred_;
  BranchNet<S> target_;
};

}  // namespace freqboot::net
