#pragma once

#include <cmath>
#include <cstdint>

// Hot loops shared by the tape ops and the inference engine. Both call into
// these so training-time and inference-time forwards are bit-identical.
//
// The `omp simd` pragmas permit reassociated reductions on the inner
// dot/axpy loops (compiled with -fopenmp-simd; harmless no-ops otherwise).
// Results stay deterministic for a fixed binary.

namespace cnlu::detail {

template <typename T>
inline T dot(const T* a, const T* b, int64_t n) {
  T acc = T(0);
#pragma omp simd reduction(+ : acc)
  for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, int64_t n) {
#pragma omp simd
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// out[t, c] = b[c] + <w[c, :, :], x[t : t+k, :]>  for t in [0, n_out).
// x is row-major [n_padded, d], so the window is one contiguous block of
// k*d scalars; w rows are contiguous as well.
template <typename T>
inline void conv1d_forward(const T* x, int64_t d, const T* w, const T* b, int64_t C,
                           int64_t k, int64_t n_out, T* out) {
  const int64_t kd = k * d;
  for (int64_t c = 0; c < C; ++c) {
    const T* wc = w + c * kd;
    const T bias = b[c];
    for (int64_t t = 0; t < n_out; ++t) out[t * C + c] = bias + dot(x + t * d, wc, kd);
  }
}

// Accumulates into dw/db/dx (callers zero or reuse them as needed).
// dx may be null when the input requires no gradient.
template <typename T>
inline void conv1d_backward(const T* x, int64_t d, const T* w, int64_t C, int64_t k,
                            int64_t n_out, const T* dout, T* dw, T* db, T* dx) {
  const int64_t kd = k * d;
  for (int64_t c = 0; c < C; ++c) {
    T* dwc = dw + c * kd;
    T db_acc = T(0);
    for (int64_t t = 0; t < n_out; ++t) {
      const T g = dout[t * C + c];
      if (g == T(0)) continue;
      db_acc += g;
      axpy(g, x + t * d, dwc, kd);
      if (dx) axpy(g, w + c * kd, dx + t * d, kd);
    }
    db[c] += db_acc;
  }
}

// y[t, :] = b + x[t, :] @ w  with w row-major [in, out].
template <typename T>
inline void linear_forward(const T* x, int64_t rows, int64_t in, const T* w, const T* b,
                           int64_t out, T* y) {
  for (int64_t t = 0; t < rows; ++t) {
    T* yt = y + t * out;
    for (int64_t j = 0; j < out; ++j) yt[j] = b[j];
    const T* xt = x + t * in;
    for (int64_t i = 0; i < in; ++i)
      if (xt[i] != T(0)) axpy(xt[i], w + i * out, yt, out);
  }
}

template <typename T>
inline void linear_backward(const T* x, int64_t rows, int64_t in, const T* w, int64_t out,
                            const T* dy, T* dw, T* db, T* dx) {
  for (int64_t t = 0; t < rows; ++t) {
    const T* dyt = dy + t * out;
    const T* xt = x + t * in;
    axpy(T(1), dyt, db, out);
    for (int64_t i = 0; i < in; ++i) {
      if (xt[i] != T(0)) axpy(xt[i], dyt, dw + i * out, out);
      if (dx) dx[t * in + i] += dot(w + i * out, dyt, out);
    }
  }
}

// Numerically stable log-softmax; probs written in place over logits copy.
template <typename T>
inline T log_sum_exp(const T* logits, int64_t n, T* max_out) {
  T m = logits[0];
  for (int64_t i = 1; i < n; ++i) m = logits[i] > m ? logits[i] : m;
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) s += std::exp(logits[i] - m);
  *max_out = m;
  return std::log(s);
}

template <typename T>
inline void softmax(const T* logits, int64_t n, T* probs) {
  T m;
  const T lse = log_sum_exp(logits, n, &m);
  for (int64_t i = 0; i < n; ++i) probs[i] = std::exp(logits[i] - m - lse);
}

}  // namespace cnlu::detail
