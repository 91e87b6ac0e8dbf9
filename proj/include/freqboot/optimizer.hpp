#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "freqboot/common.hpp"
#include "freqboot/layers.hpp"

// AdamW: Adam moment estimates with bias correction, plus weight decay
// applied directly to the parameter (decoupled from the gradient moments).

namespace freqboot::opt {

struct AdamWConfig {
  double lr = 3e-4;
  double weight_decay = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;

  void validate() const {
    if (lr < 0.0) throw ConfigError("adamw: lr must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("adamw: weight_decay must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
      throw ConfigError("adamw: betas must be in [0,1)");
    if (eps <= 0.0) throw ConfigError("adamw: eps must be > 0");
  }
};

template <class S>
class AdamW {
 public:
  AdamW() = default;

  AdamW(const AdamWConfig& cfg, const net::ParamRefs<S>& params) : cfg_(cfg) {
    cfg.validate();
    params_ = params;
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (auto& p : params) {
      m_.emplace_back(std::vector<double>(p.value->size(), 0.0));
      v_.emplace_back(std::vector<double>(p.value->size(), 0.0));
    }
  }

  std::int64_t step_count() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

  /// One update from the accumulated gradients. Moments are kept in double so
  /// the update rule is the same regardless of the parameter scalar type.
  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      S* w = params_[pi].value->data();
      const S* g = params_[pi].grad->data();
      double* m = m_[pi].data();
      double* v = v_[pi].data();
      const long n = params_[pi].value->size();
      for (long j = 0; j < n; ++j) {
        const double gj = static_cast<double>(g[j]);
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        double wj = static_cast<double>(w[j]);
        wj -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * wj);
        w[j] = static_cast<S>(wj);
      }
    }
  }

 private:
  AdamWConfig cfg_;
  net::ParamRefs<S> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t t_ = 0;
};

}  // namespace freqboot::opt
