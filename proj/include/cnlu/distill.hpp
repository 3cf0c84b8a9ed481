#pragma once

#include "cnlu/infer.hpp"
#include "cnlu/pruning.hpp"
#include "cnlu/train.hpp"

namespace cnlu {

namespace detail {

template <typename T>
void check_kd_args(double temp, double lambda) {
  if (!(temp > 0.0)) throw ConfigError("distillation temperature must be > 0");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("hard-loss weight must lie in [0, 1]");
}

// Row-level pieces shared by the intent and slot KD ops. For logits s and
// teacher row t:
//   loss = lambda * xent(s, y) + (1 - lambda) * T^2 * KL(p_T || q_T)
// with p_T = softmax(t / T), q_T = softmax(s / T); the gradient w.r.t. s is
//   lambda * (softmax(s) - onehot(y)) + (1 - lambda) * T * (q_T - p_T).
template <typename T>
double kd_row_value(const T* s, const T* t, int64_t K, double temp, double lambda, int y,
                    T* probs, T* q_t, T* p_t) {
  std::vector<double> buf(static_cast<size_t>(K));
  // Returns the full log-sum-exp of src/scale and writes its softmax to dst.
  auto softmax_into = [&](const T* src, double scale, T* dst) {
    for (int64_t i = 0; i < K; ++i)
      buf[static_cast<size_t>(i)] = static_cast<double>(src[i]) / scale;
    double m;
    const double rest = log_sum_exp(buf.data(), K, &m);
    for (int64_t i = 0; i < K; ++i)
      dst[i] = static_cast<T>(std::exp(buf[static_cast<size_t>(i)] - m - rest));
    return m + rest;
  };
  // Hard cross-entropy term at temperature 1.
  const double lse1 = softmax_into(s, 1.0, probs);
  const double xent = lse1 - static_cast<double>(s[y]);
  // Tempered distributions and KL(p_T || q_T) = sum p (log p - log q).
  const double lse_s = softmax_into(s, temp, q_t);
  const double lse_t = softmax_into(t, temp, p_t);
  double kl = 0.0;
  for (int64_t i = 0; i < K; ++i) {
    const double lp = static_cast<double>(t[i]) / temp - lse_t;
    const double lq = static_cast<double>(s[i]) / temp - lse_s;
    kl += std::exp(lp) * (lp - lq);
  }
  return lambda * xent + (1.0 - lambda) * temp * temp * kl;
}

template <typename T>
void kd_row_grad(T g, int64_t K, double temp, double lambda, int y, const T* probs, const T* q_t,
                 const T* p_t, T* ds) {
  const T lam = static_cast<T>(lambda);
  const T soft = static_cast<T>((1.0 - lambda) * temp);
  for (int64_t i = 0; i < K; ++i) ds[i] += g * (lam * probs[i] + soft * (q_t[i] - p_t[i]));
  ds[y] -= g * lam;
}

}  // namespace detail

// Distillation loss for one logit vector against a frozen teacher row.
template <typename T>
Var kd_loss(Tape<T>& tape, Var student, const Tensor<T>& teacher, double temp, double lambda,
            int hard_target) {
  detail::check_kd_args<T>(temp, lambda);
  const Tensor<T>& s = tape.value(student);
  if (s.rank() != 1 || teacher.rank() != 1 || s.dim(0) != teacher.dim(0))
    throw DimensionError("student/teacher logit mismatch: " + shape_str(s.shape) + " vs " +
                         shape_str(teacher.shape));
  const int64_t K = s.dim(0);
  if (hard_target < 0 || hard_target >= K)
    throw LabelError("hard target " + std::to_string(hard_target) + " outside [0, " +
                     std::to_string(K) + ")");
  Tensor<T> probs({K}), q_t({K}), p_t({K});
  const double v = detail::kd_row_value(s.ptr(), teacher.ptr(), K, temp, lambda, hard_target,
                                        probs.ptr(), q_t.ptr(), p_t.ptr());
  Tensor<T> out({1});
  out.at(0) = static_cast<T>(v);
  return tape.push(
      std::move(out), tape.needs_grad(student),
      [student, probs = std::move(probs), q_t = std::move(q_t), p_t = std::move(p_t), K, temp,
       lambda, hard_target](Tape<T>& t, Var self) {
        detail::kd_row_grad(t.grad(self).at(0), K, temp, lambda, hard_target, probs.ptr(),
                            q_t.ptr(), p_t.ptr(), t.grad(student).ptr());
      });
}

// Mean per-position distillation loss over rows whose target is not
// ignore_id.
template <typename T>
Var kd_sequence_loss(Tape<T>& tape, Var student, const Tensor<T>& teacher, double temp,
                     double lambda, std::span<const int> targets, int ignore_id) {
  detail::check_kd_args<T>(temp, lambda);
  const Tensor<T>& s = tape.value(student);
  if (s.rank() != 2 || s.shape != teacher.shape)
    throw DimensionError("student/teacher slot logit mismatch: " + shape_str(s.shape) + " vs " +
                         shape_str(teacher.shape));
  if (static_cast<int64_t>(targets.size()) != s.dim(0))
    throw DimensionError("target count " + std::to_string(targets.size()) +
                         " does not match logit rows " + std::to_string(s.dim(0)));
  const int64_t n = s.dim(0), K = s.dim(1);
  Tensor<T> probs({n, K}), q_t({n, K}), p_t({n, K});
  double sum = 0.0;
  int64_t count = 0;
  for (int64_t r = 0; r < n; ++r) {
    const int y = targets[static_cast<size_t>(r)];
    if (y == ignore_id) continue;
    if (y < 0 || y >= K)
      throw LabelError("hard target " + std::to_string(y) + " outside [0, " + std::to_string(K) +
                       ") at row " + std::to_string(r));
    sum += detail::kd_row_value(s.row(r), teacher.row(r), K, temp, lambda, y, probs.row(r),
                                q_t.row(r), p_t.row(r));
    ++count;
  }
  if (count == 0) throw DataError("no valid positions for sequence distillation");
  Tensor<T> out({1});
  out.at(0) = static_cast<T>(sum / static_cast<double>(count));
  std::vector<int> tgt(targets.begin(), targets.end());
  return tape.push(
      std::move(out), tape.needs_grad(student),
      [student, probs = std::move(probs), q_t = std::move(q_t), p_t = std::move(p_t),
       tgt = std::move(tgt), K, temp, lambda, ignore_id, count](Tape<T>& t, Var self) {
        const T g = t.grad(self).at(0) / static_cast<T>(count);
        Tensor<T>& ds = t.grad(student);
        for (int64_t r = 0; r < static_cast<int64_t>(tgt.size()); ++r) {
          const int y = tgt[static_cast<size_t>(r)];
          if (y == ignore_id) continue;
          detail::kd_row_grad(g, K, temp, lambda, y, probs.row(r), q_t.row(r), p_t.row(r),
                              ds.row(r));
        }
      });
}

struct DistillConfig {
  double temperature = 2.0;
  double lambda = 0.5;  // weight on the hard-label term
  ModelConfig student;  // same family, reduced filter count
  TrainConfig train;

  void validate(const ModelConfig& teacher) const {
    detail::check_kd_args<float>(temperature, lambda);
    student.validate();
    if (student.num_filters > teacher.num_filters)
      throw ConfigError("student must not be wider than the teacher");
    if (student.embed_dim != teacher.embed_dim || student.kernel_size != teacher.kernel_size ||
        student.task_mode != teacher.task_mode)
      throw ConfigError("student must share the teacher's d, k and task mode");
  }
};

// Student filter count matching a pruned model at the same compression rate.
inline int student_filters_for_compression(int teacher_filters, double compression) {
  return filters_after_sparsity(teacher_filters, compression);
}

struct DistillResult {
  JointModel student;
  TrainResult train;
};

// Trains a freshly initialized student against the frozen teacher's logits
// (precomputed once per training example) mixed with the hard labels; the
// intent and slot terms combine under the teacher's alpha weighting.
inline DistillResult distill(const JointModel& teacher, const DistillConfig& cfg,
                             const std::vector<EncodedExample>& train_set,
                             const std::vector<EncodedExample>& dev_set,
                             std::ostream* log = nullptr) {
  cfg.validate(teacher.config);

  struct TeacherOut {
    Tensor<float> intent;
    Tensor<float> slot;
  };
  std::vector<TeacherOut> cache(train_set.size());
  {
    InferenceEngine<float> engine(teacher);
    for (size_t i = 0; i < train_set.size(); ++i) {
      auto out = engine.forward(train_set[i]);
      if (teacher.has_intent_head()) {
        cache[i].intent = Tensor<float>({teacher.labels.num_intents()});
        std::copy(out.intent_logits, out.intent_logits + cache[i].intent.size(),
                  cache[i].intent.ptr());
      }
      if (teacher.has_slot_head()) {
        cache[i].slot = Tensor<float>({out.slot_rows, teacher.labels.num_slots()});
        std::copy(out.slot_logits, out.slot_logits + cache[i].slot.size(), cache[i].slot.ptr());
      }
    }
  }

  JointModel student =
      init_model(cfg.student, teacher.vocab, teacher.labels, teacher.embeddings, cfg.train.seed);
  const double temp = cfg.temperature, lambda = cfg.lambda;

  TrainResult tr = train_loop(
      std::move(student), train_set, dev_set, cfg.train,
      [&cache, temp, lambda](Tape<float>& tape, const JointModel& m, const ParamVars<float>& pv,
                             const EncodedExample& ex, size_t idx, std::mt19937& rng) {
        ForwardVars<float> f = forward_graph(tape, m, pv, ex, /*training=*/true, rng);
        Var intent_term, slot_term;
        if (f.intent_logits.valid())
          intent_term = kd_loss(tape, f.intent_logits, cache[idx].intent, temp, lambda,
                                ex.intent_id);
        if (f.slot_logits.valid())
          slot_term = kd_sequence_loss(tape, f.slot_logits, cache[idx].slot, temp, lambda,
                                       std::span<const int>(ex.slot_ids.data(), ex.valid_len),
                                       LabelMaps::kIgnore);
        switch (m.config.task_mode) {
          case TaskMode::kIntent: return intent_term;
          case TaskMode::kSlot: return slot_term;
          case TaskMode::kJoint: break;
        }
        return weighted_sum(tape, intent_term, m.config.alpha, slot_term,
                            1.f - m.config.alpha);
      },
      log);

  DistillResult out;
  out.student = tr.model;
  out.train = std::move(tr);
  return out;
}

}  // namespace cnlu
