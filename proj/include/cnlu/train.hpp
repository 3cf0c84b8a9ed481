#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "cnlu/adam.hpp"
#include "cnlu/checkpoint.hpp"
#include "cnlu/metrics.hpp"

namespace cnlu {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
  int max_epochs = 50;
  int patience = 5;
  uint64_t seed = 1;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  }
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_intent_acc = 0.0;
  double dev_slot_f1 = 0.0;
  double dev_metric = 0.0;
  bool improved = false;
};

struct TrainResult {
  JointModel model;  // best dev checkpoint, not the last epoch's weights
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_metric = -std::numeric_limits<double>::infinity();
  bool diverged = false;
};

// Dev selection metric: the sum of whichever of intent accuracy / slot F1 the
// task mode produces.
inline double dev_selection_metric(const EvalResult& r) {
  double m = 0.0;
  if (r.has_intent) m += r.intent_accuracy;
  if (r.has_slot) m += r.slot.f1;
  return m;
}

// Mini-batch Adam with per-epoch dev evaluation and early stopping. The loss
// graph per sample comes from `loss_fn(tape, model, params, example,
// dataset_index, rng)` so distillation can reuse the loop with a different
// objective. A non-finite batch loss aborts with the best checkpoint so far.
template <typename LossFn>
TrainResult train_loop(JointModel model, const std::vector<EncodedExample>& train_set,
                       const std::vector<EncodedExample>& dev_set, const TrainConfig& cfg,
                       LossFn&& loss_fn, std::ostream* log = nullptr) {
  cfg.validate();
  if (train_set.empty() || dev_set.empty())
    throw DataError("training requires non-empty train and dev splits");

  std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
  std::vector<Tensor<float>*> params = trainable_params(model);
  AdamState<float> opt{static_cast<float>(cfg.lr), static_cast<float>(cfg.beta1),
                       static_cast<float>(cfg.beta2), static_cast<float>(cfg.eps)};
  opt.init(params);
  std::vector<Tensor<float>> grads;
  grads.reserve(params.size());
  for (const Tensor<float>* p : params) grads.push_back(Tensor<float>::zeros(p->shape));

  TrainResult result;
  result.model = model;
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t{0});
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    bool bad = false;
    for (size_t start = 0; start < order.size() && !bad; start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      const auto bn = static_cast<float>(stop - start);
      for (auto& g : grads) g.fill(0.f);
      try {
        for (size_t j = start; j < stop; ++j) {
          const size_t idx = order[j];
          Tape<float> tape;
          ParamVars<float> pv = register_params(tape, model);
          Var loss = loss_fn(tape, model, pv, train_set[idx], idx, rng);
          const double l = static_cast<double>(tape.value(loss).at(0));
          if (!std::isfinite(l)) throw NumericError("loss is not finite");
          loss_sum += l;
          tape.backward(loss);
          const std::vector<Var> vars = param_var_list(model, pv);
          for (size_t pi = 0; pi < params.size(); ++pi)
            detail::axpy(1.f / bn, tape.grad(vars[pi]).ptr(), grads[pi].ptr(),
                         grads[pi].size());
        }
      } catch (const NumericError&) {
        bad = true;
        break;
      }
      std::vector<const Tensor<float>*> gptrs;
      gptrs.reserve(grads.size());
      for (const auto& g : grads) gptrs.push_back(&g);
      adam_step<float>(params, gptrs, opt);
    }
    if (bad) {
      result.diverged = true;
      if (log) *log << "epoch " << epoch << ": loss diverged, keeping epoch " << result.best_epoch
                    << " weights\n";
      break;
    }

    EvalResult dev = evaluate(model, dev_set);
    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(train_set.size());
    st.dev_intent_acc = dev.intent_accuracy;
    st.dev_slot_f1 = dev.slot.f1;
    st.dev_metric = dev_selection_metric(dev);
    if (st.dev_metric > result.best_metric) {
      result.best_metric = st.dev_metric;
      result.best_epoch = epoch;
      result.model = model;
      stale_epochs = 0;
      st.improved = true;
    } else {
      ++stale_epochs;
    }
    result.history.push_back(st);
    if (log)
      *log << "epoch " << epoch << ": loss " << st.train_loss << " dev_acc " << st.dev_intent_acc
           << " dev_f1 " << st.dev_slot_f1 << (st.improved ? "  *\n" : "\n");
    if (stale_epochs >= cfg.patience) break;
  }
  // If epoch 1 diverged, result.model still holds the initial weights: the
  // last-good state by definition.
  return result;
}

// Standard supervised training under the model's task mode.
inline TrainResult train(JointModel model, const std::vector<EncodedExample>& train_set,
                         const std::vector<EncodedExample>& dev_set, const TrainConfig& cfg,
                         std::ostream* log = nullptr) {
  return train_loop(
      std::move(model), train_set, dev_set, cfg,
      [](Tape<float>& tape, const JointModel& m, const ParamVars<float>& pv,
         const EncodedExample& ex, size_t, std::mt19937& rng) {
        return loss_graph(tape, m, pv, ex, /*training=*/true, rng).total;
      },
      log);
}

}  // namespace cnlu
