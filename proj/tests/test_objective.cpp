#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "freqboot/common.hpp"
#include "freqboot/objective.hpp"
#include "freqboot/rng.hpp"
#include "freqboot/tensor.hpp"

using namespace freqboot;
using objective::combined_loss;
using objective::LossWeights;
using objective::normalized_regression_loss;
using objective::normalized_regression_loss_backward;

namespace {

template <class S>
Tensor<S> random_matrix(long b, long d, rng::Stream& rs, double lo = -1.0, double hi = 1.0) {
  Tensor<S> t({b, d});
  for (long i = 0; i < t.size(); ++i)
    t[i] = static_cast<S>(lo + (hi - lo) * rs.uniform());
  return t;
}

// Independent oracle: explicitly normalize both rows, take the rowwise
// squared Euclidean distance, average.
template <class S>
double mse_of_normalized_rows(const Tensor<S>& q, const Tensor<S>& g) {
  const long b = q.dim(0), d = q.dim(1);
  double total = 0.0;
  for (long i = 0; i < b; ++i) {
    double nq = 0.0, ng = 0.0;
    for (long j = 0; j < d; ++j) {
      nq += static_cast<double>(q.at2(i, j)) * q.at2(i, j);
      ng += static_cast<double>(g.at2(i, j)) * g.at2(i, j);
    }
    nq = std::max(std::sqrt(nq), objective::kNormFloor);
    ng = std::max(std::sqrt(ng), objective::kNormFloor);
    for (long j = 0; j < d; ++j) {
      const double diff = q.at2(i, j) / nq - g.at2(i, j) / ng;
      total += diff * diff;
    }
  }
  return total / static_cast<double>(b);
}

}  // namespace

TEST_CASE("2-2cos form equals normalized MSE over 1000 random pairs, d=128") {
  rng::Stream rs(rng::mix(101, "loss-identity"));
  const long d = 128;
  double max_diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto q = random_matrix<float>(1, d, rs, -2.0, 2.0);
    auto g = random_matrix<float>(1, d, rs, -2.0, 2.0);
    const double via_cos = normalized_regression_loss(q, g);
    const double via_mse = mse_of_normalized_rows(q, g);
    max_diff = std::max(max_diff, std::abs(via_cos - via_mse));
  }
  CHECK(max_diff < 1e-6);
}

TEST_CASE("loss is invariant to positive rescaling of either argument") {
  rng::Stream rs(rng::mix(102, "loss-scale"));
  auto q = random_matrix<double>(8, 32, rs);
  auto g = random_matrix<double>(8, 32, rs);
  const double base = normalized_regression_loss(q, g);
  Tensor<double> q5 = q, g9 = g;
  for (long i = 0; i < q5.size(); ++i) q5[i] *= 5.0;
  for (long i = 0; i < g9.size(); ++i) g9[i] *= 0.09;
  CHECK(normalized_regression_loss(q5, g) == doctest::Approx(base).epsilon(1e-12));
  CHECK(normalized_regression_loss(q, g9) == doctest::Approx(base).epsilon(1e-12));
  CHECK(normalized_regression_loss(q5, g9) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("loss endpoints: aligned 0, opposite 4, orthogonal 2, and always in [0,4]") {
  Tensor<double> q({1, 3}), g({1, 3});
  q.at2(0, 0) = 3.0;
  g.at2(0, 0) = 7.0;  // same direction, different magnitude
  CHECK(normalized_regression_loss(q, q) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normalized_regression_loss(q, g) == doctest::Approx(0.0).epsilon(1e-15));
  g.at2(0, 0) = -7.0;
  CHECK(normalized_regression_loss(q, g) == doctest::Approx(4.0).epsilon(1e-15));
  g.at2(0, 0) = 0.0;
  g.at2(0, 1) = 2.0;
  CHECK(normalized_regression_loss(q, g) == doctest::Approx(2.0).epsilon(1e-15));

  rng::Stream rs(rng::mix(103, "loss-range"));
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_matrix<float>(4, 16, rs, -3.0, 3.0);
    auto b = random_matrix<float>(4, 16, rs, -3.0, 3.0);
    const double l = normalized_regression_loss(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 4.0 + 1e-12);
  }
}

TEST_CASE("random high-dimensional pairs average near 2") {
  // Independent gaussian vectors in d=128 are nearly orthogonal, so the mean
  // loss concentrates around 2.
  rng::Stream rs(rng::mix(104, "loss-mc"));
  const long b = 1000, d = 128;
  Tensor<double> q({b, d}), g({b, d});
  for (long i = 0; i < q.size(); ++i) q[i] = rs.gaussian();
  for (long i = 0; i < g.size(); ++i) g[i] = rs.gaussian();
  const double mean = normalized_regression_loss(q, g);
  CHECK(mean == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("gradient matches finite differences") {
  rng::Stream rs(rng::mix(105, "loss-fd"));
  const long b = 4, d = 8;
  auto q = random_matrix<double>(b, d, rs);
  auto g = random_matrix<double>(b, d, rs);
  auto dq = normalized_regression_loss_backward(q, g, 1.0);
  const double h = 1e-6;
  for (long i = 0; i < q.size(); ++i) {
    Tensor<double> qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const double fd =
        (normalized_regression_loss(qp, g) - normalized_regression_loss(qm, g)) / (2 * h);
    CHECK(dq[i] == doctest::Approx(fd).epsilon(1e-6));
  }

  // scale multiplies through
  auto dq_half = normalized_regression_loss_backward(q, g, 0.5);
  for (long i = 0; i < dq.size(); ++i)
    CHECK(dq_half[i] == doctest::Approx(0.5 * dq[i]).epsilon(1e-12));
}

TEST_CASE("degenerate all-zero row: warning logged, zero gradient, finite loss") {
  WarningLog::drain();
  Tensor<float> q({2, 4}), g({2, 4});
  q.at2(0, 0) = 1.0f;  // row 0 fine, row 1 all zeros
  for (long j = 0; j < 4; ++j) g.at2(0, j) = 0.5f, g.at2(1, j) = 0.5f;
  const double l = normalized_regression_loss(q, g);
  CHECK(std::isfinite(l));
  auto warnings = WarningLog::drain();
  CHECK(!warnings.empty());

  auto dq = normalized_regression_loss_backward(q, g, 1.0);
  for (long j = 0; j < 4; ++j) CHECK(dq.at2(1, j) == 0.0f);
  bool row0_nonzero = false;
  for (long j = 0; j < 4; ++j) row0_nonzero = row0_nonzero || dq.at2(0, j) != 0.0f;
  CHECK(row0_nonzero);
}

TEST_CASE("combined loss mixes branch losses by lambda") {
  WarningLog::drain();
  LossWeights w(0.51);
  CHECK(combined_loss(2.0, 1.0, w) == doctest::Approx(0.51 * 2.0 + 0.49 * 1.0).epsilon(1e-15));
  CHECK(WarningLog::count() == 0);

  // convex combination stays between the branch losses for lambda in [0,1]
  for (double lam : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    LossWeights wl(lam);
    const double c = combined_loss(3.0, 1.0, wl);
    CHECK(c >= 1.0 - 1e-12);
    CHECK(c <= 3.0 + 1e-12);
  }
  CHECK(combined_loss(3.0, 1.0, LossWeights(0.0)) == doctest::Approx(1.0));
  CHECK(combined_loss(3.0, 1.0, LossWeights(1.0)) == doctest::Approx(3.0));
  CHECK(WarningLog::count() == 0);

  // out-of-range lambda still computes, but warns
  LossWeights big(500.0);
  CHECK(WarningLog::count() > 0);
  WarningLog::drain();
  CHECK(big.lfb_weight() == doctest::Approx(500.0));
  CHECK(big.hfb_weight() == doctest::Approx(-499.0));
  CHECK(combined_loss(1.0, 1.0, big) == doctest::Approx(1.0));
}

TEST_CASE("loss rejects mismatched shapes") {
  Tensor<float> q({2, 4}), g({2, 5});
  CHECK_THROWS_AS((void)normalized_regression_loss(q, g), StateError);
  Tensor<float> r3({2, 2, 2});
  CHECK_THROWS_AS((void)normalized_regression_loss(r3, r3), StateError);
}
