#pragma once

#include <cstdint>
#include <span>

#include "cnlu/model.hpp"

namespace cnlu {

// Eval-mode forward passes with preallocated workspaces: after construction
// no per-sample state is allocated, which the latency benchmark asserts.
// Dropout is an identity here, so this is exactly the deployed compute path.
// Not thread-safe; use one engine per thread.
template <typename T = float>
class InferenceEngine {
 public:
  struct Output {
    const T* intent_logits = nullptr;  // [I] or null
    const T* slot_logits = nullptr;    // [rows, S] row-major or null
    int64_t slot_rows = 0;
    int intent_pred = -1;              // argmax, -1 when the head is absent
  };

  explicit InferenceEngine(const JointModelT<T>& model)
      : model_(&model),
        pad_(model.config.task_mode == TaskMode::kIntent ? 0
                                                         : (model.config.kernel_size - 1) / 2) {
    const ModelConfig& cfg = model.config;
    const int64_t L = std::max(cfg.max_seq_len, cfg.kernel_size);
    x_ = Tensor<T>::zeros({L + cfg.kernel_size - 1, cfg.embed_dim});
    feat_ = Tensor<T>::zeros({L, model.num_filters()});
    if (model.has_intent_head()) {
      pooled_ = Tensor<T>::zeros({model.num_filters()});
      intent_logits_ = Tensor<T>::zeros({model.labels.num_intents()});
    }
    if (model.has_slot_head())
      slot_logits_ = Tensor<T>::zeros({L, model.labels.num_slots()});
    slot_preds_.assign(static_cast<size_t>(L), 0);
  }

  const JointModelT<T>& model() const { return *model_; }

  Output forward(const EncodedExample& ex) {
    const ModelConfig& cfg = model_->config;
    if (ex.valid_len < 1) throw DimensionError("example has empty valid length");
    if (ex.valid_len > cfg.max_seq_len)
      throw DimensionError("valid_len exceeds the engine's max_seq_len");
    const int64_t d = cfg.embed_dim, k = cfg.kernel_size;
    const int64_t n = cfg.task_mode == TaskMode::kIntent
                          ? std::max<int64_t>(ex.valid_len, k)
                          : ex.valid_len;

    // Embed into rows [pad_, pad_ + n); border rows stay zero. The right
    // border is re-zeroed because a longer previous example may have
    // written there.
    const Tensor<T>& E = model_->embeddings;
    for (int64_t i = 0; i < n; ++i) {
      const int id = ex.token_ids[static_cast<size_t>(i)];
      if (id < 0 || id >= E.dim(0))
        throw LabelError("token id " + std::to_string(id) + " outside vocabulary");
      std::copy(E.row(id), E.row(id) + d, x_.row(pad_ + i));
    }
    for (int64_t i = 0; i < pad_; ++i)
      std::fill(x_.row(pad_ + n + i), x_.row(pad_ + n + i) + d, T(0));

    const int64_t n_out = n + 2 * pad_ - k + 1;
    const int64_t C = model_->num_filters();
    detail::conv1d_forward(x_.ptr(), d, model_->conv_w.ptr(), model_->conv_b.ptr(), C, k,
                           n_out, feat_.ptr());

    Output out;
    if (model_->has_intent_head()) {
      for (int64_t c = 0; c < C; ++c) {
        T best = feat_.at(0, c);
        for (int64_t t = 1; t < n_out; ++t) best = std::max(best, feat_.at(t, c));
        pooled_.at(c) = best;
      }
      detail::linear_forward(pooled_.ptr(), 1, C, model_->intent_w.ptr(),
                             model_->intent_b.ptr(), model_->labels.num_intents(),
                             intent_logits_.ptr());
      out.intent_logits = intent_logits_.ptr();
      out.intent_pred = static_cast<int>(
          std::max_element(intent_logits_.ptr(),
                           intent_logits_.ptr() + intent_logits_.size()) -
          intent_logits_.ptr());
    }
    if (model_->has_slot_head()) {
      const int64_t S = model_->labels.num_slots();
      detail::linear_forward(feat_.ptr(), n_out, C, model_->slot_w.ptr(),
                             model_->slot_b.ptr(), S, slot_logits_.ptr());
      out.slot_logits = slot_logits_.ptr();
      out.slot_rows = n_out;
      for (int64_t t = 0; t < n_out; ++t) {
        const T* row = slot_logits_.row(t);
        slot_preds_[static_cast<size_t>(t)] =
            static_cast<int>(std::max_element(row, row + S) - row);
      }
    }
    return out;
  }

  // Per-position slot predictions from the last forward call.
  std::span<const int> slot_preds(int64_t rows) const {
    return {slot_preds_.data(), static_cast<size_t>(rows)};
  }

  // Workspace identity; stable across forward calls by construction.
  uint64_t workspace_fingerprint() const {
    auto mix = [](uint64_t h, const void* p, size_t cap) {
      h ^= reinterpret_cast<uint64_t>(p) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= cap + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return h;
    };
    uint64_t h = 0;
    h = mix(h, x_.data.data(), x_.data.capacity());
    h = mix(h, feat_.data.data(), feat_.data.capacity());
    h = mix(h, pooled_.data.data(), pooled_.data.capacity());
    h = mix(h, intent_logits_.data.data(), intent_logits_.data.capacity());
    h = mix(h, slot_logits_.data.data(), slot_logits_.data.capacity());
    h = mix(h, slot_preds_.data(), slot_preds_.capacity());
    return h;
  }

 private:
  const JointModelT<T>* model_;
  int64_t pad_;
  Tensor<T> x_, feat_, pooled_, intent_logits_, slot_logits_;
  std::vector<int> slot_preds_;
};

}  // namespace cnlu
