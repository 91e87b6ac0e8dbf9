#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "freqboot/common.hpp"
#include "freqboot/rng.hpp"
#include "freqboot/tensor.hpp"

// Stochastic view generation. Each input batch yields two views drawn from
// the same augmentation family; the default family is jitter -> segment
// permutation -> channel-pair rotation, with a different rotation angle per
// view. All randomness is derived from (seed, view, sample index), so views
// are reproducible sample by sample.

namespace freqboot::aug {

enum class Family { jitter_permute_rotate, jitter_scale };

inline std::string family_name(Family f) {
  return f == Family::jitter_permute_rotate ? "jitter_permute_rotate" : "jitter_scale";
}

inline Family family_from_name(const std::string& s) {
  if (s == "jitter_permute_rotate") return Family::jitter_permute_rotate;
  if (s == "jitter_scale") return Family::jitter_scale;
  throw ConfigError("augmentation: unknown family '" + s + "'");
}

struct AugmentationConfig {
  Family family = Family::jitter_permute_rotate;
  double jitter_sigma = 0.8;
  long max_segments = 8;
  double rotation_deg_online = 30.0;
  double rotation_deg_target = 45.0;

  void validate() const {
    if (jitter_sigma < 0.0) throw ConfigError("augmentation: jitter_sigma must be >= 0");
    if (max_segments < 1) throw ConfigError("augmentation: max_segments must be >= 1");
  }
};

template <class S>
struct ViewPair {
  Tensor<S> view_online;  // x1, fed to the gradient-trained branch
  Tensor<S> view_target;  // x2, fed to the EMA branch
};

/// x + N(0, sigma^2) elementwise. Noise is drawn in sample-major order from
/// the stream, one value per element.
template <class S>
Tensor<S> jitter(const Tensor<S>& x, double sigma, rng::Stream& rs) {
  Tensor<S> out = x;
  if (sigma == 0.0) return out;
  S* p = out.data();
  for (long i = 0; i < out.size(); ++i) p[i] = static_cast<S>(p[i] + rs.gaussian(0.0, sigma));
  return out;
}

template <class S>
Tensor<S> jitter(const Tensor<S>& x, double sigma, std::uint64_t seed) {
  rng::Stream rs(rng::mix(seed, "jitter"));
  return jitter(x, sigma, rs);
}

/// Time-axis cuts and segment order shared by every channel of one sample.
struct PermutationPlan {
  std::vector<long> cuts;   // strictly increasing interior cut positions in (0, T)
  std::vector<long> order;  // permutation of the cuts.size()+1 segments
};

/// k ~ Uniform{1..max_segments}, then k-1 distinct interior cut positions and
/// a uniform shuffle of the resulting segments.
inline PermutationPlan draw_permutation_plan(long t, long max_segments, rng::Stream& rs) {
  if (max_segments > t) throw ConfigError("permute_segments: max_segments exceeds series length");
  PermutationPlan plan;
  const long k = rs.uniform_int(1, max_segments);
  if (k > 1) {
    // sample k-1 distinct positions from {1..t-1}
    std::vector<long> pool(t - 1);
    std::iota(pool.begin(), pool.end(), 1L);
    for (long i = 0; i < k - 1; ++i) {
      const long j = rs.uniform_int(i, static_cast<long>(pool.size()) - 1);
      std::swap(pool[i], pool[j]);
    }
    plan.cuts.assign(pool.begin(), pool.begin() + (k - 1));
    std::sort(plan.cuts.begin(), plan.cuts.end());
  }
  plan.order.resize(plan.cuts.size() + 1);
  std::iota(plan.order.begin(), plan.order.end(), 0L);
  for (long i = static_cast<long>(plan.order.size()) - 1; i > 0; --i) {
    const long j = rs.uniform_int(0, i);
    std::swap(plan.order[i], plan.order[j]);
  }
  return plan;
}

/// Rearranges the time axis of sample `b` according to the plan; all channels
/// move together, so the multiset of per-timestep column vectors is preserved.
template <class S>
void apply_permutation_plan(const Tensor<S>& x, long b, const PermutationPlan& plan,
                            Tensor<S>& out) {
  const long c = x.dim(1), t = x.dim(2);
  std::vector<long> bounds;
  bounds.push_back(0);
  for (long cut : plan.cuts) bounds.push_back(cut);
  bounds.push_back(t);
  long pos = 0;
  for (long seg : plan.order) {
    const long lo = bounds[seg], hi = bounds[seg + 1];
    for (long ci = 0; ci < c; ++ci)
      for (long ti = lo; ti < hi; ++ti) out.at3(b, ci, pos + (ti - lo)) = x.at3(b, ci, ti);
    pos += hi - lo;
  }
}

/// Per sample: split the time axis into a random number of segments (at most
/// max_segments) and shuffle them. Plans are drawn per sample from `rs`.
template <class S>
Tensor<S> permute_segments(const Tensor<S>& x, long max_segments, rng::Stream& rs) {
  const long n = x.dim(0), t = x.dim(2);
  if (max_segments > t) throw ConfigError("permute_segments: max_segments exceeds series length");
  Tensor<S> out(x.shape());
  for (long b = 0; b < n; ++b) {
    PermutationPlan plan = draw_permutation_plan(t, max_segments, rs);
    apply_permutation_plan(x, b, plan, out);
  }
  return out;
}

template <class S>
Tensor<S> permute_segments(const Tensor<S>& x, long max_segments, std::uint64_t seed) {
  rng::Stream rs(rng::mix(seed, "permute"));
  return permute_segments(x, max_segments, rs);
}

/// Givens rotation by angle_deg applied to consecutive channel pairs
/// (c0,c1), (c2,c3), ... identically at every timestep. A leftover odd
/// channel (or a 1-channel signal) passes through unchanged.
template <class S>
Tensor<S> rotate(const Tensor<S>& x, double angle_deg) {
  Tensor<S> out = x;
  const long n = x.dim(0), c = x.dim(1), t = x.dim(2);
  const double rad = angle_deg * 3.14159265358979323846 / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  for (long b = 0; b < n; ++b)
    for (long ci = 0; ci + 1 < c; ci += 2)
      for (long ti = 0; ti < t; ++ti) {
        const double a = x.at3(b, ci, ti), bb = x.at3(b, ci + 1, ti);
        out.at3(b, ci, ti) = static_cast<S>(cs * a - sn * bb);
        out.at3(b, ci + 1, ti) = static_cast<S>(sn * a + cs * bb);
      }
  return out;
}

/// Multiplies every channel of every sample by a factor ~ N(1, 0.1^2),
/// constant over time (the weak-augmentation family's second stage).
template <class S>
Tensor<S> scale(const Tensor<S>& x, rng::Stream& rs, double factor_sigma = 0.1) {
  Tensor<S> out = x;
  const long n = x.dim(0), c = x.dim(1), t = x.dim(2);
  for (long b = 0; b < n; ++b)
    for (long ci = 0; ci < c; ++ci) {
      const double f = rs.gaussian(1.0, factor_sigma);
      for (long ti = 0; ti < t; ++ti) out.at3(b, ci, ti) = static_cast<S>(x.at3(b, ci, ti) * f);
    }
  return out;
}

namespace detail {

// One fully-augmented view of sample b, written into `out`. Per-sample stream
// keys on (seed, view label, global sample index) so view randomness is
// independent of batch composition.
template <class S>
void strong_view_sample(const Tensor<S>& x, long b, const AugmentationConfig& cfg,
                        double angle_deg, std::uint64_t stream_key, Tensor<S>& out) {
  const long c = x.dim(1), t = x.dim(2);
  rng::Stream rs(stream_key);
  Tensor<S> one({1, c, t});
  for (long ci = 0; ci < c; ++ci)
    for (long ti = 0; ti < t; ++ti) one.at3(0, ci, ti) = x.at3(b, ci, ti);
  one = jitter(one, cfg.jitter_sigma, rs);
  PermutationPlan plan = draw_permutation_plan(t, cfg.max_segments, rs);
  Tensor<S> permuted({1, c, t});
  apply_permutation_plan(one, 0, plan, permuted);
  Tensor<S> rotated = rotate(permuted, angle_deg);
  for (long ci = 0; ci < c; ++ci)
    for (long ti = 0; ti < t; ++ti) out.at3(b, ci, ti) = rotated.at3(0, ci, ti);
}

template <class S>
void weak_view_sample(const Tensor<S>& x, long b, const AugmentationConfig& cfg,
                      std::uint64_t stream_key, Tensor<S>& out) {
  const long c = x.dim(1), t = x.dim(2);
  rng::Stream rs(stream_key);
  Tensor<S> one({1, c, t});
  for (long ci = 0; ci < c; ++ci)
    for (long ti = 0; ti < t; ++ti) one.at3(0, ci, ti) = x.at3(b, ci, ti);
  one = jitter(one, cfg.jitter_sigma, rs);
  one = scale(one, rs);
  for (long ci = 0; ci < c; ++ci)
    for (long ti = 0; ti < t; ++ti) out.at3(b, ci, ti) = one.at3(0, ci, ti);
}

}  // namespace detail

/// Two independently augmented views of the batch. `sample_offset` is the
/// global index of the first batch row, so per-sample streams do not depend
/// on how the epoch was batched.
template <class S>
ViewPair<S> make_view_pair(const Tensor<S>& x, const AugmentationConfig& cfg, std::uint64_t seed,
                           long sample_offset = 0) {
  cfg.validate();
  ViewPair<S> vp;
  vp.view_online = Tensor<S>(x.shape());
  vp.view_target = Tensor<S>(x.shape());
  const long n = x.dim(0);
  for (long b = 0; b < n; ++b) {
    const std::uint64_t idx = static_cast<std::uint64_t>(sample_offset + b);
    if (cfg.family == Family::jitter_permute_rotate) {
      detail::strong_view_sample(x, b, cfg, cfg.rotation_deg_online,
                                 rng::mix(seed, "view1", idx), vp.view_online);
      detail::strong_view_sample(x, b, cfg, cfg.rotation_deg_target,
                                 rng::mix(seed, "view2", idx), vp.view_target);
    } else {
      // jitter_scale: same strong view for the online branch, weak view for
      // the target branch (the different-family ablation).
      detail::strong_view_sample(x, b, cfg, cfg.rotation_deg_online,
                                 rng::mix(seed, "view1", idx), vp.view_online);
      detail::weak_view_sample(x, b, cfg, rng::mix(seed, "view2", idx), vp.view_target);
    }
  }
  return vp;
}

/// Explicit different-family pair (strong online view, weak target view),
/// regardless of cfg.family. Used by the augmentation-family ablation.
template <class S>
ViewPair<S> make_view_pair_different_family(const Tensor<S>& x, const AugmentationConfig& cfg,
                                            std::uint64_t seed, long sample_offset = 0) {
  AugmentationConfig c = cfg;
  c.family = Family::jitter_scale;
  return make_view_pair(x, c, seed, sample_offset);
}

}  // namespace freqboot::aug
