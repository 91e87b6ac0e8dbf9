#pragma once

#include <algorithm>
#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#define FB_OMP(directive) _Pragma(directive)
#else
#define FB_OMP(directive)
#endif

// Compute kernels for the network layers.
//
// Every kernel exists twice: `ref::` holds the plain serial loops kept as the
// reference for testing, and the top-level functions are the OpenMP versions
// used by the layers. Both variants accumulate each output element in the
// same order, so their results are bitwise identical at any thread count;
// the kernel test suite asserts this and the bench tool compares their
// throughput. Layout is row-major [B, C, T] (see tensor.hpp).

namespace freqboot::kernels {

enum class Exec { auto_, serial, parallel };

inline bool resolve_parallel(Exec e) {
#if defined(_OPENMP)
  return e != Exec::serial;
#else
  (void)e;
  return false;
#endif
}

inline void set_threads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------
// Serial reference kernels
// ---------------------------------------------------------------------------

namespace ref {

// y[b,co,to] = bias[co] + sum_{ci,k} w[co,ci,k] * x[b,ci,to + k*dil - padL]
template <class S>
void conv1d_forward(const S* x, long B, long Cin, long T, const S* w, const S* bias, long Cout,
                    long K, long dil, long padL, S* y, long Tout) {
  for (long b = 0; b < B; ++b) {
    for (long co = 0; co < Cout; ++co) {
      S* yrow = y + (b * Cout + co) * Tout;
      for (long to = 0; to < Tout; ++to) {
        S acc = bias ? bias[co] : S(0);
        for (long ci = 0; ci < Cin; ++ci) {
          const S* xrow = x + (b * Cin + ci) * T;
          const S* wrow = w + (co * Cin + ci) * K;
          for (long k = 0; k < K; ++k) {
            long ti = to + k * dil - padL;
            if (ti >= 0 && ti < T) acc += wrow[k] * xrow[ti];
          }
        }
        yrow[to] = acc;
      }
    }
  }
}

template <class S>
void conv1d_backward_input(const S* dy, long B, long Cout, long Tout, const S* w, long Cin, long K,
                           long dil, long padL, S* dx, long T) {
  for (long b = 0; b < B; ++b) {
    for (long ci = 0; ci < Cin; ++ci) {
      S* dxrow = dx + (b * Cin + ci) * T;
      for (long ti = 0; ti < T; ++ti) {
        S acc = S(0);
        for (long co = 0; co < Cout; ++co) {
          const S* dyrow = dy + (b * Cout + co) * Tout;
          const S* wrow = w + (co * Cin + ci) * K;
          for (long k = 0; k < K; ++k) {
            long to = ti - k * dil + padL;
            if (to >= 0 && to < Tout) acc += wrow[k] * dyrow[to];
          }
        }
        dxrow[ti] = acc;
      }
    }
  }
}

// Accumulates into dW/db.
template <class S>
void conv1d_backward_params(const S* dy, long B, long Cout, long Tout, const S* x, long Cin,
                            long T, long K, long dil, long padL, S* dW, S* db) {
  for (long co = 0; co < Cout; ++co) {
    for (long ci = 0; ci < Cin; ++ci) {
      for (long k = 0; k < K; ++k) {
        S acc = S(0);
        for (long b = 0; b < B; ++b) {
          const S* dyrow = dy + (b * Cout + co) * Tout;
          const S* xrow = x + (b * Cin + ci) * T;
          for (long to = 0; to < Tout; ++to) {
            long ti = to + k * dil - padL;
            if (ti >= 0 && ti < T) acc += dyrow[to] * xrow[ti];
          }
        }
        dW[(co * Cin + ci) * K + k] += acc;
      }
    }
  }
  if (db) {
    for (long co = 0; co < Cout; ++co) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) {
        const S* dyrow = dy + (b * Cout + co) * Tout;
        for (long to = 0; to < Tout; ++to) acc += dyrow[to];
      }
      db[co] += acc;
    }
  }
}

// y[b,o] = bias[o] + sum_i x[b,i] * w[o,i]
template <class S>
void linear_forward(const S* x, long B, long In, const S* w, const S* bias, long Out, S* y) {
  for (long b = 0; b < B; ++b) {
    for (long o = 0; o < Out; ++o) {
      S acc = bias ? bias[o] : S(0);
      const S* xrow = x + b * In;
      const S* wrow = w + o * In;
      for (long i = 0; i < In; ++i) acc += xrow[i] * wrow[i];
      y[b * Out + o] = acc;
    }
  }
}

template <class S>
void linear_backward_input(const S* dy, long B, long Out, const S* w, long In, S* dx) {
  for (long b = 0; b < B; ++b) {
    for (long i = 0; i < In; ++i) {
      S acc = S(0);
      const S* dyrow = dy + b * Out;
      for (long o = 0; o < Out; ++o) acc += dyrow[o] * w[o * In + i];
      dx[b * In + i] = acc;
    }
  }
}

template <class S>
void linear_backward_params(const S* dy, long B, long Out, const S* x, long In, S* dW, S* db) {
  for (long o = 0; o < Out; ++o) {
    for (long i = 0; i < In; ++i) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) acc += dy[b * Out + o] * x[b * In + i];
      dW[o * In + i] += acc;
    }
    if (db) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) acc += dy[b * Out + o];
      db[o] += acc;
    }
  }
}

// Population mean/variance per channel over (B, T). Double accumulators.
template <class S>
void channel_stats(const S* x, long B, long C, long T, S* mean, S* var) {
  const double n = static_cast<double>(B) * static_cast<double>(T);
  for (long c = 0; c < C; ++c) {
    double s = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* row = x + (b * C + c) * T;
      for (long t = 0; t < T; ++t) s += static_cast<double>(row[t]);
    }
    const double mu = s / n;
    double sq = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* row = x + (b * C + c) * T;
      for (long t = 0; t < T; ++t) {
        const double d = static_cast<double>(row[t]) - mu;
        sq += d * d;
      }
    }
    mean[c] = static_cast<S>(mu);
    var[c] = static_cast<S>(sq / n);
  }
}

// y = gamma * (x - mean) * invstd + beta; optionally records xhat.
template <class S>
void bn_normalize(const S* x, long B, long C, long T, const S* mean, const S* invstd,
                  const S* gamma, const S* beta, S* y, S* xhat) {
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* xrow = x + (b * C + c) * T;
      S* yrow = y + (b * C + c) * T;
      S* hrow = xhat ? xhat + (b * C + c) * T : nullptr;
      for (long t = 0; t < T; ++t) {
        const S h = (xrow[t] - mean[c]) * invstd[c];
        if (hrow) hrow[t] = h;
        yrow[t] = gamma[c] * h + beta[c];
      }
    }
  }
}

// Batch-statistics backward. dgamma/dbeta accumulate; dx is overwritten.
template <class S>
void bn_backward(const S* dy, const S* xhat, long B, long C, long T, const S* gamma,
                 const S* invstd, S* dx, S* dgamma, S* dbeta) {
  const double n = static_cast<double>(B) * static_cast<double>(T);
  for (long c = 0; c < C; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* dyrow = dy + (b * C + c) * T;
      const S* hrow = xhat + (b * C + c) * T;
      for (long t = 0; t < T; ++t) {
        s1 += static_cast<double>(dyrow[t]);
        s2 += static_cast<double>(dyrow[t]) * static_cast<double>(hrow[t]);
      }
    }
    dbeta[c] += static_cast<S>(s1);
    dgamma[c] += static_cast<S>(s2);
    const S m1 = static_cast<S>(s1 / n);
    const S m2 = static_cast<S>(s2 / n);
    const S g = gamma[c] * invstd[c];
    for (long b = 0; b < B; ++b) {
      const S* dyrow = dy + (b * C + c) * T;
      const S* hrow = xhat + (b * C + c) * T;
      S* dxrow = dx + (b * C + c) * T;
      for (long t = 0; t < T; ++t) dxrow[t] = g * (dyrow[t] - m1 - hrow[t] * m2);
    }
  }
}

// Eval-mode backward: y is an affine map per channel, dx = dy * gamma * invstd.
template <class S>
void bn_backward_affine(const S* dy, long B, long C, long T, const S* gamma, const S* invstd,
                        S* dx) {
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S g = gamma[c] * invstd[c];
      const S* dyrow = dy + (b * C + c) * T;
      S* dxrow = dx + (b * C + c) * T;
      for (long t = 0; t < T; ++t) dxrow[t] = g * dyrow[t];
    }
  }
}

template <class S>
void relu_forward(const S* x, long n, S* y) {
  for (long i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <class S>
void relu_backward(const S* x, const S* dy, long n, S* dx) {
  for (long i = 0; i < n; ++i) dx[i] = x[i] > S(0) ? dy[i] : S(0);
}

// Ties resolve to the earliest index.
template <class S>
void maxpool1d_forward(const S* x, long B, long C, long T, long size, long stride, S* y,
                       long* argmax, long Tout) {
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* xrow = x + (b * C + c) * T;
      S* yrow = y + (b * C + c) * Tout;
      long* arow = argmax + (b * C + c) * Tout;
      for (long to = 0; to < Tout; ++to) {
        long start = to * stride;
        long best = start;
        S v = xrow[start];
        for (long k = 1; k < size; ++k) {
          if (xrow[start + k] > v) {
            v = xrow[start + k];
            best = start + k;
          }
        }
        yrow[to] = v;
        arow[to] = best;
      }
    }
  }
}

template <class S>
void maxpool1d_backward(const S* dy, const long* argmax, long B, long C, long Tout, S* dx,
                        long T) {
  for (long i = 0; i < B * C * T; ++i) dx[i] = S(0);
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* dyrow = dy + (b * C + c) * Tout;
      const long* arow = argmax + (b * C + c) * Tout;
      S* dxrow = dx + (b * C + c) * T;
      for (long to = 0; to < Tout; ++to) dxrow[arow[to]] += dyrow[to];
    }
  }
}

template <class S>
void add(const S* a, const S* b, long n, S* y) {
  for (long i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class S>
void axpy(S alpha, const S* x, long n, S* y) {
  for (long i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class S>
void mul(const S* a, const S* b, long n, S* y) {
  for (long i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

}  // namespace ref

// ---------------------------------------------------------------------------
// OpenMP kernels. Parallelism is always over independent output elements,
// with the per-element accumulation order identical to ref::, so results
// match the reference bitwise.
// ---------------------------------------------------------------------------

template <class S>
void conv1d_forward(const S* x, long B, long Cin, long T, const S* w, const S* bias, long Cout,
                    long K, long dil, long padL, S* y, long Tout, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::conv1d_forward(x, B, Cin, T, w, bias, Cout, K, dil, padL, y, Tout);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long co = 0; co < Cout; ++co) {
      S* yrow = y + (b * Cout + co) * Tout;
      for (long to = 0; to < Tout; ++to) {
        S acc = bias ? bias[co] : S(0);
        for (long ci = 0; ci < Cin; ++ci) {
          const S* xrow = x + (b * Cin + ci) * T;
          const S* wrow = w + (co * Cin + ci) * K;
          for (long k = 0; k < K; ++k) {
            long ti = to + k * dil - padL;
            if (ti >= 0 && ti < T) acc += wrow[k] * xrow[ti];
          }
        }
        yrow[to] = acc;
      }
    }
  }
}

template <class S>
void conv1d_backward_input(const S* dy, long B, long Cout, long Tout, const S* w, long Cin, long K,
                           long dil, long padL, S* dx, long T, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::conv1d_backward_input(dy, B, Cout, Tout, w, Cin, K, dil, padL, dx, T);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long ci = 0; ci < Cin; ++ci) {
      S* dxrow = dx + (b * Cin + ci) * T;
      for (long ti = 0; ti < T; ++ti) {
        S acc = S(0);
        for (long co = 0; co < Cout; ++co) {
          const S* dyrow = dy + (b * Cout + co) * Tout;
          const S* wrow = w + (co * Cin + ci) * K;
          for (long k = 0; k < K; ++k) {
            long to = ti - k * dil + padL;
            if (to >= 0 && to < Tout) acc += wrow[k] * dyrow[to];
          }
        }
        dxrow[ti] = acc;
      }
    }
  }
}

template <class S>
void conv1d_backward_params(const S* dy, long B, long Cout, long Tout, const S* x, long Cin,
                            long T, long K, long dil, long padL, S* dW, S* db,
                            Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::conv1d_backward_params(dy, B, Cout, Tout, x, Cin, T, K, dil, padL, dW, db);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long co = 0; co < Cout; ++co) {
    for (long ci = 0; ci < Cin; ++ci) {
      for (long k = 0; k < K; ++k) {
        S acc = S(0);
        for (long b = 0; b < B; ++b) {
          const S* dyrow = dy + (b * Cout + co) * Tout;
          const S* xrow = x + (b * Cin + ci) * T;
          for (long to = 0; to < Tout; ++to) {
            long ti = to + k * dil - padL;
            if (ti >= 0 && ti < T) acc += dyrow[to] * xrow[ti];
          }
        }
        dW[(co * Cin + ci) * K + k] += acc;
      }
    }
  }
  if (db) {
    FB_OMP("omp parallel for schedule(static)")
    for (long co = 0; co < Cout; ++co) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) {
        const S* dyrow = dy + (b * Cout + co) * Tout;
        for (long to = 0; to < Tout; ++to) acc += dyrow[to];
      }
      db[co] += acc;
    }
  }
}

template <class S>
void linear_forward(const S* x, long B, long In, const S* w, const S* bias, long Out, S* y,
                    Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::linear_forward(x, B, In, w, bias, Out, y);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long o = 0; o < Out; ++o) {
      S acc = bias ? bias[o] : S(0);
      const S* xrow = x + b * In;
      const S* wrow = w + o * In;
      for (long i = 0; i < In; ++i) acc += xrow[i] * wrow[i];
      y[b * Out + o] = acc;
    }
  }
}

template <class S>
void linear_backward_input(const S* dy, long B, long Out, const S* w, long In, S* dx,
                           Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::linear_backward_input(dy, B, Out, w, In, dx);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long i = 0; i < In; ++i) {
      S acc = S(0);
      const S* dyrow = dy + b * Out;
      for (long o = 0; o < Out; ++o) acc += dyrow[o] * w[o * In + i];
      dx[b * In + i] = acc;
    }
  }
}

template <class S>
void linear_backward_params(const S* dy, long B, long Out, const S* x, long In, S* dW, S* db,
                            Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::linear_backward_params(dy, B, Out, x, In, dW, db);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long o = 0; o < Out; ++o) {
    for (long i = 0; i < In; ++i) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) acc += dy[b * Out + o] * x[b * In + i];
      dW[o * In + i] += acc;
    }
  }
  if (db) {
    FB_OMP("omp parallel for schedule(static)")
    for (long o = 0; o < Out; ++o) {
      S acc = S(0);
      for (long b = 0; b < B; ++b) acc += dy[b * Out + o];
      db[o] += acc;
    }
  }
}

template <class S>
void channel_stats(const S* x, long B, long C, long T, S* mean, S* var, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::channel_stats(x, B, C, T, mean, var);
    return;
  }
  const double n = static_cast<double>(B) * static_cast<double>(T);
  FB_OMP("omp parallel for schedule(static)")
  for (long c = 0; c < C; ++c) {
    double s = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* row = x + (b * C + c) * T;
      for (long t = 0; t < T; ++t) s += static_cast<double>(row[t]);
    }
    const double mu = s / n;
    double sq = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* row = x + (b * C + c) * T;
      for (long t = 0; t < T; ++t) {
        const double d = static_cast<double>(row[t]) - mu;
        sq += d * d;
      }
    }
    mean[c] = static_cast<S>(mu);
    var[c] = static_cast<S>(sq / n);
  }
}

template <class S>
void bn_normalize(const S* x, long B, long C, long T, const S* mean, const S* invstd,
                  const S* gamma, const S* beta, S* y, S* xhat, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::bn_normalize(x, B, C, T, mean, invstd, gamma, beta, y, xhat);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* xrow = x + (b * C + c) * T;
      S* yrow = y + (b * C + c) * T;
      S* hrow = xhat ? xhat + (b * C + c) * T : nullptr;
      for (long t = 0; t < T; ++t) {
        const S h = (xrow[t] - mean[c]) * invstd[c];
        if (hrow) hrow[t] = h;
        yrow[t] = gamma[c] * h + beta[c];
      }
    }
  }
}

template <class S>
void bn_backward(const S* dy, const S* xhat, long B, long C, long T, const S* gamma,
                 const S* invstd, S* dx, S* dgamma, S* dbeta, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::bn_backward(dy, xhat, B, C, T, gamma, invstd, dx, dgamma, dbeta);
    return;
  }
  const double n = static_cast<double>(B) * static_cast<double>(T);
  FB_OMP("omp parallel for schedule(static)")
  for (long c = 0; c < C; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (long b = 0; b < B; ++b) {
      const S* dyrow = dy + (b * C + c) * T;
      const S* hrow = xhat + (b * C + c) * T;
      for (long t = 0; t < T; ++t) {
        s1 += static_cast<double>(dyrow[t]);
        s2 += static_cast<double>(dyrow[t]) * static_cast<double>(hrow[t]);
      }
    }
    dbeta[c] += static_cast<S>(s1);
    dgamma[c] += static_cast<S>(s2);
    const S m1 = static_cast<S>(s1 / n);
    const S m2 = static_cast<S>(s2 / n);
    const S g = gamma[c] * invstd[c];
    for (long b = 0; b < B; ++b) {
      const S* dyrow = dy + (b * C + c) * T;
      const S* hrow = xhat + (b * C + c) * T;
      S* dxrow = dx + (b * C + c) * T;
      for (long t = 0; t < T; ++t) dxrow[t] = g * (dyrow[t] - m1 - hrow[t] * m2);
    }
  }
}

template <class S>
void bn_backward_affine(const S* dy, long B, long C, long T, const S* gamma, const S* invstd,
                        S* dx, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::bn_backward_affine(dy, B, C, T, gamma, invstd, dx);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S g = gamma[c] * invstd[c];
      const S* dyrow = dy + (b * C + c) * T;
      S* dxrow = dx + (b * C + c) * T;
      for (long t = 0; t < T; ++t) dxrow[t] = g * dyrow[t];
    }
  }
}

template <class S>
void relu_forward(const S* x, long n, S* y, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::relu_forward(x, n, y);
    return;
  }
  FB_OMP("omp parallel for schedule(static)")
  for (long i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
}

template <class S>
void relu_backward(const S* x, const S* dy, long n, S* dx, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::relu_backward(x, dy, n, dx);
    return;
  }
  FB_OMP("omp parallel for schedule(static)")
  for (long i = 0; i < n; ++i) dx[i] = x[i] > S(0) ? dy[i] : S(0);
}

template <class S>
void maxpool1d_forward(const S* x, long B, long C, long T, long size, long stride, S* y,
                       long* argmax, long Tout, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::maxpool1d_forward(x, B, C, T, size, stride, y, argmax, Tout);
    return;
  }
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* xrow = x + (b * C + c) * T;
      S* yrow = y + (b * C + c) * Tout;
      long* arow = argmax + (b * C + c) * Tout;
      for (long to = 0; to < Tout; ++to) {
        long start = to * stride;
        long best = start;
        S v = xrow[start];
        for (long k = 1; k < size; ++k) {
          if (xrow[start + k] > v) {
            v = xrow[start + k];
            best = start + k;
          }
        }
        yrow[to] = v;
        arow[to] = best;
      }
    }
  }
}

template <class S>
void maxpool1d_backward(const S* dy, const long* argmax, long B, long C, long Tout, S* dx, long T,
                        Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::maxpool1d_backward(dy, argmax, B, C, Tout, dx, T);
    return;
  }
  // Rows (b, c) scatter into disjoint dx regions.
  FB_OMP("omp parallel for collapse(2) schedule(static)")
  for (long b = 0; b < B; ++b) {
    for (long c = 0; c < C; ++c) {
      const S* dyrow = dy + (b * C + c) * Tout;
      const long* arow = argmax + (b * C + c) * Tout;
      S* dxrow = dx + (b * C + c) * T;
      for (long t = 0; t < T; ++t) dxrow[t] = S(0);
      for (long to = 0; to < Tout; ++to) dxrow[arow[to]] += dyrow[to];
    }
  }
}

template <class S>
void add(const S* a, const S* b, long n, S* y, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::add(a, b, n, y);
    return;
  }
  FB_OMP("omp parallel for schedule(static)")
  for (long i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <class S>
void axpy(S alpha, const S* x, long n, S* y, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::axpy(alpha, x, n, y);
    return;
  }
  FB_OMP("omp parallel for schedule(static)")
  for (long i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class S>
void mul(const S* a, const S* b, long n, S* y, Exec e = Exec::auto_) {
  if (!resolve_parallel(e)) {
    ref::mul(a, b, n, y);
    return;
  }
  FB_OMP("omp parallel for schedule(static)")
  for (long i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

}  // namespace freqboot::kernels
