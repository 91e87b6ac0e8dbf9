#pragma once

#include <cmath>
#include <string>

#include "freqboot/common.hpp"
#include "freqboot/tensor.hpp"

// Normalized regression objective between online predictions and target
// projections: rows are L2-normalized and the squared distance
// ||q_hat - g_hat||^2 = 2 - 2 cos(q, g) is averaged over the batch. The
// combined objective mixes the two branch losses as
// lambda * L_lfb + (1 - lambda) * L_hfb.

namespace freqboot::objective {

constexpr double kNormFloor = 1e-12;

/// Mean over rows of ||q/||q|| - g/||g||||^2. Row norms are floored at
/// kNormFloor; an all-zero row is degenerate (its direction is undefined), so
/// it is logged as a warning and treated as contributing its raw normalized
/// distance under the floor.
template <class S>
double normalized_regression_loss(const Tensor<S>& q, const Tensor<S>& g) {
  if (q.rank() != 2 || !q.same_shape(g))
    throw StateError("loss: expected matching [B,d] tensors, got " + q.shape_str() + " vs " +
                     g.shape_str());
  const long b = q.dim(0), d = q.dim(1);
  double total = 0.0;
  for (long i = 0; i < b; ++i) {
    double nq = 0.0, ng = 0.0, dot = 0.0;
    for (long j = 0; j < d; ++j) {
      const double qv = q.at2(i, j), gv = g.at2(i, j);
      nq += qv * qv;
      ng += gv * gv;
      dot += qv * gv;
    }
    nq = std::sqrt(nq);
    ng = std::sqrt(ng);
    if (nq < kNormFloor || ng < kNormFloor)
      WarningLog::add("loss: near-zero row norm in batch row " + std::to_string(i) +
                      "; normalized direction is ill-defined");
    const double cosv = dot / (std::max(nq, kNormFloor) * std::max(ng, kNormFloor));
    total += 2.0 - 2.0 * cosv;
  }
  return total / static_cast<double>(b);
}

/// Gradient of normalized_regression_loss w.r.t. q, times `scale`:
///   dL/dq_i = (2 / (B * ||q_i||)) * (cos(q_i, g_i) * q_hat_i - g_hat_i)
/// Degenerate rows (norm under the floor) get zero gradient; pulling on a
/// direction that does not exist is meaningless and would explode under the
/// floored division.
template <class S>
Tensor<S> normalized_regression_loss_backward(const Tensor<S>& q, const Tensor<S>& g,
                                              double scale) {
  if (q.rank() != 2 || !q.same_shape(g))
    throw StateError("loss backward: expected matching [B,d] tensors");
  const long b = q.dim(0), d = q.dim(1);
  Tensor<S> dq({b, d});
  for (long i = 0; i < b; ++i) {
    double nq = 0.0, ng = 0.0, dot = 0.0;
    for (long j = 0; j < d; ++j) {
      const double qv = q.at2(i, j), gv = g.at2(i, j);
      nq += qv * qv;
      ng += gv * gv;
      dot += qv * gv;
    }
    nq = std::sqrt(nq);
    ng = std::sqrt(ng);
    if (nq < kNormFloor || ng < kNormFloor) continue;  // zero gradient for degenerate rows
    const double cosv = dot / (nq * ng);
    const double c = scale * 2.0 / (static_cast<double>(b) * nq);
    for (long j = 0; j < d; ++j) {
      const double qhat = q.at2(i, j) / nq;
      const double ghat = g.at2(i, j) / ng;
      dq.at2(i, j) = static_cast<S>(c * (cosv * qhat - ghat));
    }
  }
  return dq;
}

struct LossWeights {
  double lambda = 0.51;

  LossWeights() = default;
  explicit LossWeights(double l) : lambda(l) {
    if (!(l >= 0.0 && l <= 1.0))
      WarningLog::add("loss weight lambda=" + std::to_string(l) +
                      " is outside [0,1]; one branch loss gets a negative weight");
  }

  double lfb_weight() const { return lambda; }
  double hfb_weight() const { return 1.0 - lambda; }
};

struct LossBreakdown {
  double lfb = 0.0;    // long-receptive-field (TCN) branch
  double hfb = 0.0;    // short-window (MLP) branch
  double total = 0.0;  // lambda * lfb + (1 - lambda) * hfb
};

inline double combined_loss(double lfb, double hfb, const LossWeights& w) {
  return w.lfb_weight() * lfb + w.hfb_weight() * hfb;
}

}  // namespace freqboot::objective
