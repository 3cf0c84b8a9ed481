#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "cnlu/kernels.hpp"
#include "cnlu/tape.hpp"

namespace cnlu {

// Prepends and appends (k-1)/2 zero rows so a following conv1d of kernel k
// preserves the time length. k must be odd.
template <typename T>
Var pad_centered(Tape<T>& tape, Var x, int64_t k) {
  if (k < 1 || k % 2 == 0)
    throw ConfigError("centered padding requires odd kernel size, got " + std::to_string(k));
  const Tensor<T>& xv = tape.value(x);
  if (xv.rank() != 2) throw DimensionError("pad_centered expects [n, d] input");
  if (k == 1) return x;
  const int64_t n = xv.dim(0), d = xv.dim(1), p = (k - 1) / 2;
  Tensor<T> out({n + k - 1, d});
  std::copy(xv.data.begin(), xv.data.end(), out.data.begin() + p * d);
  return tape.push(std::move(out), tape.needs_grad(x), [x, p, n, d](Tape<T>& t, Var self) {
    const Tensor<T>& g = t.grad(self);
    detail::axpy(T(1), g.ptr() + p * d, t.grad(x).ptr(), n * d);
  });
}

// out[t, c] = bias[c] + sum_{j,m} weights[c, j, m] * x[t+j, m]
// x: [n_padded, d], weights: [C, k, d], bias: [C] -> [n_padded - k + 1, C].
template <typename T>
Var conv1d(Tape<T>& tape, Var x, Var w, Var b) {
  const Tensor<T>&xv = tape.value(x), &wv = tape.value(w), &bv = tape.value(b);
  if (xv.rank() != 2) throw DimensionError("conv1d input must be [n_padded, d]");
  if (wv.rank() != 3) throw DimensionError("conv1d weights must be [C, k, d]");
  const int64_t n_pad = xv.dim(0), d = xv.dim(1);
  const int64_t C = wv.dim(0), k = wv.dim(1);
  if (wv.dim(2) != d)
    throw DimensionError("conv1d embedding axis mismatch: input d=" + std::to_string(d) +
                         ", weights d=" + std::to_string(wv.dim(2)));
  if (bv.rank() != 1 || bv.dim(0) != C)
    throw DimensionError("conv1d bias axis mismatch: expected [" + std::to_string(C) + "]");
  if (n_pad < k)
    throw DimensionError("conv1d time axis too short: n_padded=" + std::to_string(n_pad) +
                         " < k=" + std::to_string(k));
  const int64_t n_out = n_pad - k + 1;
  Tensor<T> out({n_out, C});
  detail::conv1d_forward(xv.ptr(), d, wv.ptr(), bv.ptr(), C, k, n_out, out.ptr());
  bool ng = tape.needs_grad(x) || tape.needs_grad(w) || tape.needs_grad(b);
  return tape.push(std::move(out), ng, [x, w, b, d, C, k, n_out](Tape<T>& t, Var self) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>&xv2 = t.value(x), &wv2 = t.value(w);
    T* dx = t.needs_grad(x) ? t.grad(x).ptr() : nullptr;
    detail::conv1d_backward(xv2.ptr(), d, wv2.ptr(), C, k, n_out, g.ptr(), t.grad(w).ptr(),
                            t.grad(b).ptr(), dx);
  });
}

template <typename T>
struct PoolResult {
  Var pooled;
  std::vector<int32_t> argmax;  // winning time index per channel
};

// pooled[c] = max over t < valid_len of features[t, c]; ties go to the
// smallest t and the gradient flows only to the winner.
template <typename T>
PoolResult<T> max_over_time(Tape<T>& tape, Var features, int64_t valid_len) {
  const Tensor<T>& fv = tape.value(features);
  if (fv.rank() != 2) throw DimensionError("max_over_time expects [n, C] features");
  const int64_t n = fv.dim(0), C = fv.dim(1);
  if (valid_len == 0) throw DimensionError("max_over_time over an empty sequence");
  if (valid_len < 0 || valid_len > n)
    throw DimensionError("max_over_time valid_len=" + std::to_string(valid_len) +
                         " out of range [1, " + std::to_string(n) + "]");
  Tensor<T> out({C});
  std::vector<int32_t> argmax(static_cast<size_t>(C), 0);
  for (int64_t c = 0; c < C; ++c) {
    T best = fv.at(0, c);
    int32_t best_t = 0;
    bool tie = false;
    for (int64_t t = 1; t < valid_len; ++t) {
      const T v = fv.at(t, c);
      if (v > best) {
        best = v;
        best_t = static_cast<int32_t>(t);
        tie = false;
      } else if (v == best) {
        tie = true;
      }
    }
    out.at(c) = best;
    argmax[static_cast<size_t>(c)] = best_t;
    if (tie) tape.pool_tie = true;
    tape.pool_choices.push_back(best_t);
  }
  auto idx = argmax;
  Var pooled = tape.push(std::move(out), tape.needs_grad(features),
                         [features, idx = std::move(idx), C](Tape<T>& t, Var self) {
                           const Tensor<T>& g = t.grad(self);
                           Tensor<T>& dx = t.grad(features);
                           for (int64_t c = 0; c < C; ++c)
                             dx.at(idx[static_cast<size_t>(c)], c) += g.at(c);
                         });
  return {pooled, std::move(argmax)};
}

// Affine map on the trailing axis. x: [in] or [rows, in]; w: [in, out].
template <typename T>
Var linear(Tape<T>& tape, Var x, Var w, Var b) {
  const Tensor<T>&xv = tape.value(x), &wv = tape.value(w), &bv = tape.value(b);
  if (wv.rank() != 2) throw DimensionError("linear weights must be [in, out]");
  const int64_t in = wv.dim(0), out_w = wv.dim(1);
  if (xv.rank() != 1 && xv.rank() != 2)
    throw DimensionError("linear input must have rank 1 or 2");
  const int64_t rows = xv.rank() == 2 ? xv.dim(0) : 1;
  const int64_t x_in = xv.rank() == 2 ? xv.dim(1) : xv.dim(0);
  if (x_in != in)
    throw DimensionError("linear inner axis mismatch: input " + std::to_string(x_in) +
                         " vs weights " + std::to_string(in));
  if (bv.rank() != 1 || bv.dim(0) != out_w)
    throw DimensionError("linear bias axis mismatch: expected [" + std::to_string(out_w) + "]");
  Shape out_shape = xv.rank() == 2 ? Shape{rows, out_w} : Shape{out_w};
  Tensor<T> out(std::move(out_shape));
  detail::linear_forward(xv.ptr(), rows, in, wv.ptr(), bv.ptr(), out_w, out.ptr());
  bool ng = tape.needs_grad(x) || tape.needs_grad(w) || tape.needs_grad(b);
  return tape.push(std::move(out), ng, [x, w, b, rows, in, out_w](Tape<T>& t, Var self) {
    const Tensor<T>& g = t.grad(self);
    const Tensor<T>&xv2 = t.value(x), &wv2 = t.value(w);
    T* dx = t.needs_grad(x) ? t.grad(x).ptr() : nullptr;
    detail::linear_backward(xv2.ptr(), rows, in, wv2.ptr(), out_w, g.ptr(), t.grad(w).ptr(),
                            t.grad(b).ptr(), dx);
  });
}

// Inverted dropout: at train time each element is zeroed with probability p
// and survivors are scaled by 1/(1-p); at eval time the op is an identity.
template <typename T, typename Rng>
Var dropout(Tape<T>& tape, Var x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0)
    throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const Tensor<T>& xv = tape.value(x);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::bernoulli_distribution drop(p);
  std::vector<uint8_t> keep(static_cast<size_t>(xv.size()));
  Tensor<T> out(xv.shape);
  for (int64_t i = 0; i < xv.size(); ++i) {
    keep[static_cast<size_t>(i)] = drop(rng) ? 0 : 1;
    out.at(i) = keep[static_cast<size_t>(i)] ? xv.at(i) * scale : T(0);
  }
  return tape.push(std::move(out), tape.needs_grad(x),
                   [x, keep = std::move(keep), scale](Tape<T>& t, Var self) {
                     const Tensor<T>& g = t.grad(self);
                     Tensor<T>& dx = t.grad(x);
                     for (int64_t i = 0; i < g.size(); ++i)
                       if (keep[static_cast<size_t>(i)]) dx.at(i) += g.at(i) * scale;
                   });
}

template <typename T>
struct XentResult {
  Var loss;
  Tensor<T> probs;
};

// loss = -log softmax(logits)[target], with max subtraction for stability.
template <typename T>
XentResult<T> softmax_xent(Tape<T>& tape, Var logits, int64_t target) {
  const Tensor<T>& lv = tape.value(logits);
  if (lv.rank() != 1) throw DimensionError("softmax_xent expects rank-1 logits");
  const int64_t K = lv.dim(0);
  if (target < 0 || target >= K)
    throw LabelError("class id " + std::to_string(target) + " out of range [0, " +
                     std::to_string(K) + ")");
  Tensor<T> probs({K});
  detail::softmax(lv.ptr(), K, probs.ptr());
  T m;
  const T lse = detail::log_sum_exp(lv.ptr(), K, &m);
  Tensor<T> loss({1});
  loss.at(0) = -(lv.at(target) - m - lse);
  auto probs_copy = probs;
  Var out = tape.push(std::move(loss), tape.needs_grad(logits),
                      [logits, probs = std::move(probs_copy), target](Tape<T>& t, Var self) {
                        const T g = t.grad(self).at(0);
                        Tensor<T>& dl = t.grad(logits);
                        for (int64_t i = 0; i < probs.size(); ++i) dl.at(i) += g * probs.at(i);
                        dl.at(target) -= g;
                      });
  return {out, std::move(probs)};
}

// Mean token-level cross-entropy over rows whose target is not ignore_id.
template <typename T>
Var sequence_xent_mean(Tape<T>& tape, Var logits, std::span<const int> targets,
                       int ignore_id) {
  const Tensor<T>& lv = tape.value(logits);
  if (lv.rank() != 2) throw DimensionError("sequence_xent_mean expects [n, K] logits");
  const int64_t n = lv.dim(0), K = lv.dim(1);
  if (static_cast<int64_t>(targets.size()) != n)
    throw DimensionError("sequence_xent_mean: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(n) + " rows");
  Tensor<T> probs({n, K});
  int64_t counted = 0;
  T total = T(0);
  for (int64_t t = 0; t < n; ++t) {
    const int y = targets[static_cast<size_t>(t)];
    if (y == ignore_id) continue;
    if (y < 0 || y >= K)
      throw LabelError("slot id " + std::to_string(y) + " out of range [0, " +
                       std::to_string(K) + ")");
    detail::softmax(lv.row(t), K, probs.row(t));
    T m;
    const T lse = detail::log_sum_exp(lv.row(t), K, &m);
    total += -(lv.at(t, y) - m - lse);
    ++counted;
  }
  if (counted == 0) throw DimensionError("sequence_xent_mean saw no valid positions");
  Tensor<T> loss({1});
  loss.at(0) = total / static_cast<T>(counted);
  std::vector<int> tgt(targets.begin(), targets.end());
  return tape.push(std::move(loss), tape.needs_grad(logits),
                   [logits, probs = std::move(probs), tgt = std::move(tgt), ignore_id, K,
                    counted](Tape<T>& t, Var self) {
                     const T g = t.grad(self).at(0) / static_cast<T>(counted);
                     Tensor<T>& dl = t.grad(logits);
                     for (int64_t r = 0; r < dl.dim(0); ++r) {
                       const int y = tgt[static_cast<size_t>(r)];
                       if (y == ignore_id) continue;
                       detail::axpy(g, probs.row(r), dl.row(r), K);
                       dl.at(r, y) -= g;
                     }
                   });
}

// wa * a + wb * b on scalars; the joint-loss combiner.
template <typename T>
Var weighted_sum(Tape<T>& tape, Var a, T wa, Var b, T wb) {
  const Tensor<T>&av = tape.value(a), &bv = tape.value(b);
  if (av.size() != 1 || bv.size() != 1)
    throw DimensionError("weighted_sum expects scalar inputs");
  Tensor<T> out({1});
  out.at(0) = wa * av.at(0) + wb * bv.at(0);
  bool ng = tape.needs_grad(a) || tape.needs_grad(b);
  return tape.push(std::move(out), ng, [a, b, wa, wb](Tape<T>& t, Var self) {
    const T g = t.grad(self).at(0);
    if (t.needs_grad(a)) t.grad(a).at(0) += wa * g;
    if (t.needs_grad(b)) t.grad(b).at(0) += wb * g;
  });
}

}  // namespace cnlu
