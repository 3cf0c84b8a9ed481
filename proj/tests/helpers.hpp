#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "cnlu/model.hpp"

namespace cnlu::testing {

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    path = base / ("cnlu_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << content;
}

// Three-split dataset in the parallel-file layout, small but with real IOB
// structure shared across splits.
inline void write_toy_dataset(const std::string& root) {
  struct Row {
    const char* in;
    const char* out;
    const char* label;
  };
  const std::vector<Row> train = {
      {"book a flight to boston", "O O O O B-city", "flight"},
      {"show flights from denver to boston", "O O O B-city O B-city", "flight"},
      {"what is the fare to denver", "O O O O O B-city", "fare"},
      {"book a hotel in boston", "O O O O B-city", "hotel"},
      {"cheap flights to denver please", "O O O B-city O", "flight"},
      {"hotel in denver for monday", "O O B-city O B-day", "hotel"},
      {"fare from boston to denver", "O O B-city O B-city", "fare"},
      {"flights to boston on monday morning", "O O B-city O B-day I-day", "flight"},
  };
  const std::vector<Row> valid = {
      {"flights from boston", "O O B-city", "flight"},
      {"cheap hotel in denver", "O O O B-city", "hotel"},
      {"fare to boston please", "O O B-city O", "fare"},
  };
  const std::vector<Row> test = {
      {"book flights to denver", "O O O B-city", "flight"},
      {"hotel in boston on monday", "O O B-city O B-day", "hotel"},
      {"what is the fare to boston", "O O O O O B-city", "fare"},
  };
  auto dump = [&](const std::string& split, const std::vector<Row>& rows) {
    std::string in, out, label;
    for (const Row& r : rows) {
      in += std::string(r.in) + "\n";
      out += std::string(r.out) + "\n";
      label += std::string(r.label) + "\n";
    }
    write_file(root + "/" + split + "/seq.in", in);
    write_file(root + "/" + split + "/seq.out", out);
    write_file(root + "/" + split + "/label", label);
  };
  dump("train", train);
  dump("valid", valid);
  dump("test", test);
}

inline Vocabulary toy_vocab() {
  Vocabulary v;
  for (const char* w : {"book", "a", "flight", "to", "boston", "denver", "cheap", "monday"})
    v.add(w);
  return v;
}

inline LabelMaps toy_labels() {
  LabelMaps l;
  for (const char* s : {"flight", "hotel", "fare"}) l.add_intent(s);
  for (const char* s : {"O", "B-city", "I-city", "B-day", "I-day"}) l.add_slot(s);
  return l;
}

inline Tensor<float> toy_embeddings(const Vocabulary& vocab, int dim, uint64_t seed) {
  std::mt19937 rng(static_cast<uint32_t>(seed));
  Tensor<float> emb({vocab.size(), dim});
  glorot_init(emb, dim, dim, rng);
  std::fill(emb.row(Vocabulary::kPad), emb.row(Vocabulary::kPad) + dim, 0.f);
  return emb;
}

inline ModelConfig toy_config(TaskMode mode = TaskMode::kJoint) {
  ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.num_filters = 10;
  cfg.kernel_size = 3;
  cfg.max_seq_len = 12;
  cfg.task_mode = mode;
  return cfg;
}

inline JointModel toy_model(uint64_t seed = 42, TaskMode mode = TaskMode::kJoint) {
  ModelConfig cfg = toy_config(mode);
  Vocabulary vocab = toy_vocab();
  LabelMaps labels = toy_labels();
  Tensor<float> emb = toy_embeddings(vocab, cfg.embed_dim, 7);
  return init_model(cfg, std::move(vocab), std::move(labels), std::move(emb), seed);
}

// Random encoded examples with the toy inventories.
inline std::vector<EncodedExample> toy_examples(int n, uint64_t seed, int max_len = 12,
                                                int vocab_size = 10, int intents = 3,
                                                int slots = 5) {
  std::mt19937 rng(static_cast<uint32_t>(seed));
  std::uniform_int_distribution<int> tok(2, vocab_size - 1);
  std::uniform_int_distribution<int> len(2, std::min(8, max_len));
  std::uniform_int_distribution<int> intent(0, intents - 1);
  std::uniform_int_distribution<int> slot(0, slots - 1);
  std::vector<EncodedExample> out;
  for (int i = 0; i < n; ++i) {
    EncodedExample ex;
    ex.valid_len = len(rng);
    ex.token_ids.assign(static_cast<size_t>(max_len), Vocabulary::kPad);
    ex.slot_ids.assign(static_cast<size_t>(max_len), LabelMaps::kIgnore);
    for (int t = 0; t < ex.valid_len; ++t) {
      ex.token_ids[static_cast<size_t>(t)] = tok(rng);
      ex.slot_ids[static_cast<size_t>(t)] = slot(rng);
    }
    ex.intent_id = intent(rng);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace cnlu::testing
