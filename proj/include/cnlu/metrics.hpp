#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cnlu/infer.hpp"

namespace cnlu {

template <typename T>
concept IntLike = std::integral<T>;

inline double intent_accuracy(std::span<const int> preds, std::span<const int> gold) {
  if (preds.size() != gold.size())
    throw DimensionError("prediction/gold length mismatch: " + std::to_string(preds.size()) +
                         " vs " + std::to_string(gold.size()));
  if (preds.empty()) throw DimensionError("cannot score an empty prediction set");
  size_t hit = 0;
  for (size_t i = 0; i < preds.size(); ++i) hit += preds[i] == gold[i];
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

// An exactly-typed token span, end inclusive.
struct Chunk {
  std::string type;
  int start = 0;
  int end = 0;

  bool operator==(const Chunk&) const = default;
  auto operator<=>(const Chunk&) const = default;
};

// conlleval chunking over {O, B-type, I-type} with the lenient I-start rule:
// an I-type that does not continue a chunk of the same type opens a new one.
inline std::vector<Chunk> extract_chunks(std::span<const std::string> tags) {
  std::vector<Chunk> chunks;
  bool open = false;
  Chunk cur;
  auto close = [&](int end) {
    if (open) {
      cur.end = end;
      chunks.push_back(cur);
      open = false;
    }
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    const std::string& t = tags[static_cast<size_t>(i)];
    if (t == "O") {
      close(i - 1);
      continue;
    }
    if (t.size() < 3 || (t[0] != 'B' && t[0] != 'I') || t[1] != '-')
      throw DataError("malformed IOB tag '" + t + "' at position " + std::to_string(i));
    const std::string type = t.substr(2);
    if (t[0] == 'B' || !open || cur.type != type) {
      close(i - 1);
      cur = {type, i, i};
      open = true;
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return chunks;
}

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int64_t matched = 0;
  int64_t predicted = 0;
  int64_t gold = 0;
};

// Micro-averaged chunk F1 over the whole set: a hit is an exact (type, start,
// end) match. Zero denominators follow conlleval (score 0, never NaN).
inline F1Result slot_f1(const std::vector<std::vector<std::string>>& pred,
                        const std::vector<std::vector<std::string>>& gold) {
  if (pred.size() != gold.size())
    throw DimensionError("pred/gold sequence count mismatch: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gold.size()));
  F1Result r;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].size() != gold[i].size())
      throw DimensionError("utterance " + std::to_string(i) + " tag length mismatch: " +
                           std::to_string(pred[i].size()) + " vs " +
                           std::to_string(gold[i].size()));
    std::vector<Chunk> pc = extract_chunks(pred[i]);
    std::vector<Chunk> gc = extract_chunks(gold[i]);
    r.predicted += static_cast<int64_t>(pc.size());
    r.gold += static_cast<int64_t>(gc.size());
    for (const Chunk& c : pc)
      r.matched += std::find(gc.begin(), gc.end(), c) != gc.end();
  }
  if (r.predicted > 0) r.precision = static_cast<double>(r.matched) / static_cast<double>(r.predicted);
  if (r.gold > 0) r.recall = static_cast<double>(r.matched) / static_cast<double>(r.gold);
  if (r.precision + r.recall > 0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

struct EvalResult {
  double intent_accuracy = 0.0;  // meaningful only when the head exists
  F1Result slot;
  int64_t samples = 0;
  bool has_intent = false;
  bool has_slot = false;
};

// Full-split evaluation through one reused inference engine.
template <typename T>
EvalResult evaluate(const JointModelT<T>& m, const std::vector<EncodedExample>& test) {
  if (test.empty()) throw DataError("cannot evaluate an empty split");
  InferenceEngine<T> engine(m);
  std::vector<int> ipred, igold;
  std::vector<std::vector<std::string>> spred, sgold;
  for (const EncodedExample& ex : test) {
    auto out = engine.forward(ex);
    if (m.has_intent_head()) {
      ipred.push_back(out.intent_pred);
      igold.push_back(ex.intent_id);
    }
    if (m.has_slot_head()) {
      auto preds = engine.slot_preds(out.slot_rows);
      std::vector<std::string> p, g;
      p.reserve(preds.size());
      g.reserve(preds.size());
      for (size_t t = 0; t < preds.size(); ++t) {
        p.push_back(m.labels.slots[static_cast<size_t>(preds[t])]);
        g.push_back(m.labels.slots[static_cast<size_t>(ex.slot_ids[t])]);
      }
      spred.push_back(std::move(p));
      sgold.push_back(std::move(g));
    }
  }
  EvalResult r;
  r.samples = static_cast<int64_t>(test.size());
  r.has_intent = m.has_intent_head();
  r.has_slot = m.has_slot_head();
  if (r.has_intent) r.intent_accuracy = intent_accuracy(ipred, igold);
  if (r.has_slot) r.slot = slot_f1(spred, sgold);
  return r;
}

// One sample whose correctness changed between the two models on one task.
struct FlipRecord {
  int index = 0;
  std::string task;  // "intent" or "slot" (slot = utterance exact tag match)
  bool before_correct = false;
  bool after_correct = false;
  std::string gold;
  std::string before_pred;
  std::string after_pred;
};

struct FlipReport {
  std::vector<FlipRecord> records;
  int64_t samples = 0;
  int64_t intent_flips_bad = 0;   // correct -> incorrect, the headline quantity
  int64_t intent_flips_good = 0;  // incorrect -> correct, tracked separately
  int64_t slot_flips_bad = 0;
  int64_t slot_flips_good = 0;
  // Token-level correct->incorrect flips on the slot task.
  int64_t flipped_tokens = 0;
  int64_t flipped_tokens_to_outside = 0;
  std::map<std::string, int64_t> flipped_token_by_gold;
  std::map<std::string, int64_t> flipped_token_by_after;
};

// Evaluates both models on every sample and records correctness flips per
// task; token-level slot flips are aggregated by gold tag and by the
// after-model's prediction (flips into "O" counted explicitly).
template <typename T>
FlipReport flip_analysis(const JointModelT<T>& before, const JointModelT<T>& after,
                         const std::vector<EncodedExample>& test) {
  if (before.labels.intents != after.labels.intents || before.labels.slots != after.labels.slots)
    throw ConfigError("models disagree on label inventories; flips are undefined");
  if (before.vocab.id_to_token != after.vocab.id_to_token)
    throw ConfigError("models disagree on vocabulary; flips are undefined");
  if (before.config.task_mode != after.config.task_mode)
    throw ConfigError("models disagree on task mode; flips are undefined");
  if (test.empty()) throw DataError("cannot analyze flips on an empty split");

  InferenceEngine<T> eb(before), ea(after);
  FlipReport rpt;
  rpt.samples = static_cast<int64_t>(test.size());
  const auto& slots = before.labels.slots;
  std::vector<int> pb, pa;
  for (size_t i = 0; i < test.size(); ++i) {
    const EncodedExample& ex = test[i];
    auto ob = eb.forward(ex);
    auto oa = ea.forward(ex);
    if (before.has_intent_head()) {
      const bool cb = ob.intent_pred == ex.intent_id;
      const bool ca = oa.intent_pred == ex.intent_id;
      if (cb != ca) {
        (cb ? rpt.intent_flips_bad : rpt.intent_flips_good)++;
        rpt.records.push_back({static_cast<int>(i), "intent", cb, ca,
                               before.labels.intents[static_cast<size_t>(ex.intent_id)],
                               before.labels.intents[static_cast<size_t>(ob.intent_pred)],
                               before.labels.intents[static_cast<size_t>(oa.intent_pred)]});
      }
    }
    if (before.has_slot_head()) {
      auto sb = eb.slot_preds(ob.slot_rows);
      auto sa = ea.slot_preds(oa.slot_rows);
      bool all_b = true, all_a = true;
      int first_flip = -1;
      for (int t = 0; t < ex.valid_len; ++t) {
        const int g = ex.slot_ids[static_cast<size_t>(t)];
        all_b &= sb[static_cast<size_t>(t)] == g;
        all_a &= sa[static_cast<size_t>(t)] == g;
        if (sb[static_cast<size_t>(t)] == g && sa[static_cast<size_t>(t)] != g) {
          if (first_flip < 0) first_flip = t;
          rpt.flipped_tokens++;
          const std::string& after_tag = slots[static_cast<size_t>(sa[static_cast<size_t>(t)])];
          rpt.flipped_token_by_gold[slots[static_cast<size_t>(g)]]++;
          rpt.flipped_token_by_after[after_tag]++;
          if (after_tag == "O") rpt.flipped_tokens_to_outside++;
        }
      }
      if (all_b != all_a) {
        (all_b ? rpt.slot_flips_bad : rpt.slot_flips_good)++;
        const int t = first_flip >= 0 ? first_flip : 0;
        rpt.records.push_back({static_cast<int>(i), "slot", all_b, all_a,
                               slots[static_cast<size_t>(ex.slot_ids[static_cast<size_t>(t)])],
                               slots[static_cast<size_t>(sb[static_cast<size_t>(t)])],
                               slots[static_cast<size_t>(sa[static_cast<size_t>(t)])]});
      }
    }
  }
  return rpt;
}

}  // namespace cnlu
