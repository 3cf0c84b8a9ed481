#pragma once

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cnlu/data.hpp"
#include "cnlu/nn_ops.hpp"

namespace cnlu {

enum class TaskMode { kIntent = 0, kSlot = 1, kJoint = 2 };

inline std::string task_mode_name(TaskMode m) {
  switch (m) {
    case TaskMode::kIntent: return "intent";
    case TaskMode::kSlot: return "slot";
    case TaskMode::kJoint: return "joint";
  }
  return "?";
}

inline TaskMode parse_task_mode(const std::string& s) {
  if (s == "intent") return TaskMode::kIntent;
  if (s == "slot") return TaskMode::kSlot;
  if (s == "joint") return TaskMode::kJoint;
  throw ConfigError("unknown task mode '" + s + "' (expected intent, slot or joint)");
}

struct ModelConfig {
  int embed_dim = 100;
  int num_filters = 300;
  int kernel_size = 5;  // must be odd
  float dropout_p = 0.5f;
  float alpha = 0.2f;  // joint loss weight on the intent term
  int max_seq_len = 50;
  TaskMode task_mode = TaskMode::kJoint;

  void validate() const {
    if (embed_dim < 1 || num_filters < 1 || max_seq_len < 1)
      throw ConfigError("embed_dim, num_filters and max_seq_len must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0)
      throw ConfigError("kernel_size must be odd, got " + std::to_string(kernel_size));
    if (dropout_p < 0.f || dropout_p >= 1.f)
      throw ConfigError("dropout_p must lie in [0, 1)");
    if (alpha < 0.f || alpha > 1.f) throw ConfigError("alpha must lie in [0, 1]");
  }
};

// Single-layer convolutional joint model: frozen embedding table, one conv
// block, and per-task linear heads over the shared feature map. Heads absent
// under a single-task mode are empty tensors.
template <typename T>
struct JointModelT {
  ModelConfig config;
  Vocabulary vocab;
  LabelMaps labels;

  Tensor<T> embeddings;            // [V, d], never updated by training
  Tensor<T> conv_w, conv_b;        // [C, k, d], [C]
  Tensor<T> intent_w, intent_b;    // [C, I], [I]
  Tensor<T> slot_w, slot_b;        // [C, S], [S]

  bool has_intent_head() const { return !intent_w.empty(); }
  bool has_slot_head() const { return !slot_w.empty(); }
  int num_filters() const { return static_cast<int>(conv_w.dim(0)); }

  template <typename U>
  JointModelT<U> cast() const {
    JointModelT<U> out;
    out.config = config;
    out.vocab = vocab;
    out.labels = labels;
    out.embeddings = embeddings.template cast<U>();
    out.conv_w = conv_w.template cast<U>();
    out.conv_b = conv_b.template cast<U>();
    out.intent_w = intent_w.template cast<U>();
    out.intent_b = intent_b.template cast<U>();
    out.slot_w = slot_w.template cast<U>();
    out.slot_b = slot_b.template cast<U>();
    return out;
  }
};

using JointModel = JointModelT<float>;

// Trainable parameter group in a fixed order (embeddings excluded: frozen).
template <typename T>
std::vector<Tensor<T>*> trainable_params(JointModelT<T>& m) {
  std::vector<Tensor<T>*> ps{&m.conv_w, &m.conv_b};
  if (m.has_intent_head()) {
    ps.push_back(&m.intent_w);
    ps.push_back(&m.intent_b);
  }
  if (m.has_slot_head()) {
    ps.push_back(&m.slot_w);
    ps.push_back(&m.slot_b);
  }
  return ps;
}

inline JointModel init_model(const ModelConfig& config, Vocabulary vocab, LabelMaps labels,
                             Tensor<float> embeddings, uint64_t seed) {
  config.validate();
  if (embeddings.rank() != 2 || embeddings.dim(0) != vocab.size() ||
      embeddings.dim(1) != config.embed_dim)
    throw DimensionError("embedding table must be [V=" + std::to_string(vocab.size()) +
                         ", d=" + std::to_string(config.embed_dim) + "], got " +
                         shape_str(embeddings.shape));
  JointModel m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.labels = std::move(labels);
  m.embeddings = std::move(embeddings);

  const int C = config.num_filters, k = config.kernel_size, d = config.embed_dim;
  const int I = m.labels.num_intents(), S = m.labels.num_slots();
  std::mt19937 rng(static_cast<uint32_t>(seed));
  m.conv_w = Tensor<float>({C, k, d});
  glorot_init(m.conv_w, static_cast<int64_t>(k) * d, C, rng);
  m.conv_b = Tensor<float>::zeros({C});
  if (config.task_mode != TaskMode::kSlot) {
    m.intent_w = Tensor<float>({C, I});
    glorot_init(m.intent_w, C, I, rng);
    m.intent_b = Tensor<float>::zeros({I});
  }
  if (config.task_mode != TaskMode::kIntent) {
    m.slot_w = Tensor<float>({C, S});
    glorot_init(m.slot_w, C, S, rng);
    m.slot_b = Tensor<float>::zeros({S});
  }
  return m;
}

// Trainable parameter count: conv + active heads (+ optionally the frozen
// embedding table).
template <typename T>
int64_t count_params(const JointModelT<T>& m, bool include_embeddings = false) {
  int64_t n = m.conv_w.size() + m.conv_b.size() + m.intent_w.size() + m.intent_b.size() +
              m.slot_w.size() + m.slot_b.size();
  if (include_embeddings) n += m.embeddings.size();
  return n;
}

// Embedding lookup; gradients never flow to the table.
template <typename T>
Tensor<T> embed(std::span<const int> tokens, const Tensor<T>& embeddings) {
  if (tokens.empty()) throw DimensionError("cannot embed an empty token sequence");
  if (embeddings.rank() != 2) throw DimensionError("embedding table must be [V, d]");
  const int64_t V = embeddings.dim(0), d = embeddings.dim(1);
  Tensor<T> out({static_cast<int64_t>(tokens.size()), d});
  for (size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id < 0 || id >= V)
      throw LabelError("token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(V));
    std::copy(embeddings.row(id), embeddings.row(id) + d, out.row(static_cast<int64_t>(i)));
  }
  return out;
}

// alpha * intent + (1 - alpha) * slot. NaN inputs abort with the offending
// pass named.
inline double joint_loss(double intent_loss, double slot_loss, double alpha) {
  if (std::isnan(intent_loss)) throw NumericError("intent loss is NaN");
  if (std::isnan(slot_loss)) throw NumericError("slot loss is NaN");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
  return alpha * intent_loss + (1.0 - alpha) * slot_loss;
}

// Parameter leaves registered on a tape for one forward/backward pass.
template <typename T>
struct ParamVars {
  Var conv_w, conv_b, intent_w, intent_b, slot_w, slot_b;
};

template <typename T>
ParamVars<T> register_params(Tape<T>& tape, const JointModelT<T>& m) {
  ParamVars<T> p;
  p.conv_w = tape.leaf(m.conv_w);
  p.conv_b = tape.leaf(m.conv_b);
  if (m.has_intent_head()) {
    p.intent_w = tape.leaf(m.intent_w);
    p.intent_b = tape.leaf(m.intent_b);
  }
  if (m.has_slot_head()) {
    p.slot_w = tape.leaf(m.slot_w);
    p.slot_b = tape.leaf(m.slot_b);
  }
  return p;
}

template <typename T>
std::vector<Var> param_var_list(const JointModelT<T>& m, const ParamVars<T>& p) {
  std::vector<Var> vs{p.conv_w, p.conv_b};
  if (m.has_intent_head()) {
    vs.push_back(p.intent_w);
    vs.push_back(p.intent_b);
  }
  if (m.has_slot_head()) {
    vs.push_back(p.slot_w);
    vs.push_back(p.slot_b);
  }
  return vs;
}

template <typename T>
struct ForwardVars {
  Var intent_logits;        // invalid when the intent head is absent
  Var slot_logits;          // [valid_len, S]; invalid when the slot head is absent
};

// Builds the forward graph for one encoded example. The joint and slot paths
// run a centered conv over the true-length prefix (right-pad rows are PAD
// embeddings, i.e. zeros, so this matches convolving the full padded buffer
// at every position t < valid_len). The intent-only path skips the centered
// padding; utterances shorter than the kernel fall back to the PAD rows of
// the encoded buffer.
template <typename T, typename Rng>
ForwardVars<T> forward_graph(Tape<T>& tape, const JointModelT<T>& m, const ParamVars<T>& p,
                             const EncodedExample& ex, bool training, Rng& rng) {
  const ModelConfig& cfg = m.config;
  if (ex.valid_len < 1) throw DimensionError("example has empty valid length");
  if (ex.valid_len > cfg.max_seq_len)
    throw DimensionError("valid_len " + std::to_string(ex.valid_len) +
                         " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  const int k = cfg.kernel_size;
  ForwardVars<T> out;

  if (cfg.task_mode == TaskMode::kIntent) {
    const int rows = std::max(ex.valid_len, k);
    if (static_cast<size_t>(rows) > ex.token_ids.size())
      throw DimensionError("encoded buffer shorter than kernel size");
    Var x = tape.constant(embed(std::span<const int>(ex.token_ids.data(), rows), m.embeddings));
    Var feat = conv1d(tape, x, p.conv_w, p.conv_b);
    auto pooled = max_over_time(tape, feat, tape.value(feat).dim(0));
    Var dropped = dropout(tape, pooled.pooled, cfg.dropout_p, training, rng);
    out.intent_logits = linear(tape, dropped, p.intent_w, p.intent_b);
    return out;
  }

  Var x = tape.constant(
      embed(std::span<const int>(ex.token_ids.data(), ex.valid_len), m.embeddings));
  Var padded = pad_centered(tape, x, k);
  Var feat = conv1d(tape, padded, p.conv_w, p.conv_b);  // [valid_len, C]
  if (m.has_intent_head()) {
    auto pooled = max_over_time(tape, feat, ex.valid_len);
    Var dropped = dropout(tape, pooled.pooled, cfg.dropout_p, training, rng);
    out.intent_logits = linear(tape, dropped, p.intent_w, p.intent_b);
  }
  if (m.has_slot_head()) {
    Var dropped = dropout(tape, feat, cfg.dropout_p, training, rng);
    out.slot_logits = linear(tape, dropped, p.slot_w, p.slot_b);
  }
  return out;
}

template <typename T>
struct LossVars {
  Var total;
  double intent_loss = 0.0;
  double slot_loss = 0.0;
};

// Per-example loss graph under the model's task mode. The slot term is the
// mean token-level cross-entropy over valid positions.
template <typename T, typename Rng>
LossVars<T> loss_graph(Tape<T>& tape, const JointModelT<T>& m, const ParamVars<T>& p,
                       const EncodedExample& ex, bool training, Rng& rng) {
  ForwardVars<T> f = forward_graph(tape, m, p, ex, training, rng);
  LossVars<T> out;
  Var intent_loss, slot_loss;
  if (f.intent_logits.valid()) {
    intent_loss = softmax_xent(tape, f.intent_logits, ex.intent_id).loss;
    out.intent_loss = static_cast<double>(tape.value(intent_loss).at(0));
  }
  if (f.slot_logits.valid()) {
    slot_loss = sequence_xent_mean(
        tape, f.slot_logits, std::span<const int>(ex.slot_ids.data(), ex.valid_len),
        LabelMaps::kIgnore);
    out.slot_loss = static_cast<double>(tape.value(slot_loss).at(0));
  }
  switch (m.config.task_mode) {
    case TaskMode::kIntent:
      out.total = intent_loss;
      break;
    case TaskMode::kSlot:
      out.total = slot_loss;
      break;
    case TaskMode::kJoint:
      joint_loss(out.intent_loss, out.slot_loss, m.config.alpha);  // NaN gate
      out.total = weighted_sum(tape, intent_loss, static_cast<T>(m.config.alpha), slot_loss,
                               static_cast<T>(1.f - m.config.alpha));
      break;
  }
  return out;
}

}  // namespace cnlu
