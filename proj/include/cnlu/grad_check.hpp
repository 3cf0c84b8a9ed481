#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cnlu/tape.hpp"

namespace cnlu {

// A differentiable scalar function assembled on a fresh tape from the given
// parameter tensors. Returns the loss var; params[i] must be registered on
// the tape in order (leaf or via ops) and their vars reported back.
template <typename T>
struct BuiltGraph {
  Var loss;
  std::vector<Var> params;
};

template <typename T>
using GraphBuilder = std::function<BuiltGraph<T>(Tape<T>&, const std::vector<Tensor<T>>&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  int64_t checked = 0;
  int64_t skipped = 0;  // elements whose perturbation crossed a max-pool tie
  bool tie_at_base = false;
};

// Compares reverse-mode gradients against central finite differences in
// double precision. Elements where a perturbed evaluation changes any
// max-pool decision (or sits exactly on a tie) are reported and skipped.
inline GradCheckResult grad_check(const GraphBuilder<double>& build,
                                  std::vector<Tensor<double>> params, double eps = 1e-5) {
  if (eps < 1e-7 || eps > 1e-4)
    throw ConfigError("grad_check eps must lie in [1e-7, 1e-4]");

  Tape<double> base;
  BuiltGraph<double> g = build(base, params);
  base.backward(g.loss);
  GradCheckResult result;
  result.tie_at_base = base.pool_tie;
  const auto base_choices = base.pool_choices;

  auto eval = [&](const std::vector<Tensor<double>>& p, bool* crossed) -> double {
    Tape<double> t;
    BuiltGraph<double> e = build(t, p);
    *crossed = t.pool_tie || t.pool_choices != base_choices;
    return t.value(e.loss).at(0);
  };

  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor<double>& analytic = base.grad(g.params[pi]);
    for (int64_t j = 0; j < params[pi].size(); ++j) {
      const double saved = params[pi].at(j);
      bool crossed_hi = false, crossed_lo = false;
      params[pi].at(j) = saved + eps;
      const double hi = eval(params, &crossed_hi);
      params[pi].at(j) = saved - eps;
      const double lo = eval(params, &crossed_lo);
      params[pi].at(j) = saved;
      if (result.tie_at_base || crossed_hi || crossed_lo) {
        ++result.skipped;
        continue;
      }
      const double numeric = (hi - lo) / (2.0 * eps);
      const double a = analytic.at(j);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
      result.max_rel_err = std::max(result.max_rel_err, std::abs(a - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace cnlu
