#pragma once

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnlu/tensor.hpp"
#include "cnlu/util.hpp"

namespace cnlu {

// One utterance in the three-parallel-file preparation: tokens, aligned IOB
// slot tags, and an intent label.
struct RawExample {
  std::vector<std::string> tokens;
  std::vector<std::string> slot_tags;
  std::string intent;
};

struct RawSplits {
  std::vector<RawExample> train;
  std::vector<RawExample> valid;
  std::vector<RawExample> test;
};

// Token ids with PAD=0 and UNK=1 always present; remaining ids are dense and
// assigned in first-occurrence order over the training split.
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  std::vector<std::string> id_to_token{kPadToken, kUnkToken};
  std::unordered_map<std::string, int> token_to_id{{kPadToken, kPad}, {kUnkToken, kUnk}};

  int size() const { return static_cast<int>(id_to_token.size()); }

  int add(const std::string& tok) {
    auto [it, inserted] = token_to_id.emplace(tok, size());
    if (inserted) id_to_token.push_back(tok);
    return it->second;
  }

  // OOV tokens map to UNK.
  int lookup(const std::string& tok) const {
    auto it = token_to_id.find(tok);
    return it == token_to_id.end() ? kUnk : it->second;
  }
};

// Intent and slot label inventories. Maps are built over the union of the
// splits so that evaluation never crashes on a test-only label; such labels
// are simply never predicted. Padded slot positions carry kIgnore.
struct LabelMaps {
  static constexpr int kIgnore = -1;

  std::vector<std::string> intents;
  std::vector<std::string> slots;
  std::unordered_map<std::string, int> intent_to_id;
  std::unordered_map<std::string, int> slot_to_id;

  int num_intents() const { return static_cast<int>(intents.size()); }
  int num_slots() const { return static_cast<int>(slots.size()); }

  int intent_id(const std::string& label) const {
    auto it = intent_to_id.find(label);
    if (it == intent_to_id.end()) throw LabelError("unknown intent label: " + label);
    return it->second;
  }

  int slot_id(const std::string& tag) const {
    auto it = slot_to_id.find(tag);
    if (it == slot_to_id.end()) throw LabelError("unknown slot tag: " + tag);
    return it->second;
  }

  void add_intent(const std::string& label) {
    if (intent_to_id.emplace(label, num_intents()).second) intents.push_back(label);
  }
  void add_slot(const std::string& tag) {
    if (slot_to_id.emplace(tag, num_slots()).second) slots.push_back(tag);
  }
};

// Fixed-width encoding of one utterance: right-padded token ids, true
// length, aligned slot ids (kIgnore past valid_len), and the intent id.
struct EncodedExample {
  std::vector<int> token_ids;
  int valid_len = 0;
  std::vector<int> slot_ids;
  int intent_id = 0;
};

struct EncodedDataset {
  std::vector<EncodedExample> examples;
  int truncated = 0;

  size_t size() const { return examples.size(); }
};

namespace detail {

inline std::vector<RawExample> load_split(const std::string& dir, const std::string& name) {
  const std::string in_path = dir + "/seq.in";
  const std::string out_path = dir + "/seq.out";
  const std::string label_path = dir + "/label";
  if (!file_exists(in_path) || !file_exists(out_path) || !file_exists(label_path))
    throw DataError("split '" + name + "' must contain seq.in, seq.out and label under " + dir);
  const auto seq_in = read_lines(in_path);
  const auto seq_out = read_lines(out_path);
  const auto labels = read_lines(label_path);
  if (seq_in.size() != seq_out.size() || seq_in.size() != labels.size())
    throw DataError(name + ": line counts differ (seq.in=" + std::to_string(seq_in.size()) +
                    ", seq.out=" + std::to_string(seq_out.size()) +
                    ", label=" + std::to_string(labels.size()) + ")");
  std::vector<RawExample> out;
  out.reserve(seq_in.size());
  for (size_t i = 0; i < seq_in.size(); ++i) {
    RawExample ex;
    ex.tokens = split_ws(seq_in[i]);
    ex.slot_tags = split_ws(seq_out[i]);
    ex.intent = rstrip(labels[i]);
    const std::string where = name + " line " + std::to_string(i + 1);
    if (ex.tokens.empty()) throw DataError(where + ": empty utterance");
    if (ex.tokens.size() != ex.slot_tags.size())
      throw DataError(where + ": " + std::to_string(ex.tokens.size()) + " tokens vs " +
                      std::to_string(ex.slot_tags.size()) + " slot tags");
    if (ex.intent.empty()) throw DataError(where + ": empty intent label");
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::string pick_split_dir(const std::string& root, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    const std::string dir = root + "/" + n;
    if (file_exists(dir + "/seq.in")) return dir;
  }
  return {};
}

}  // namespace detail

// Loads the train/valid/test splits from `root`, each a directory of
// line-aligned seq.in / seq.out / label files. The validation split may be
// named either "valid" or "dev".
inline RawSplits load_dataset(const std::string& root) {
  const std::string train_dir = detail::pick_split_dir(root, {"train"});
  const std::string valid_dir = detail::pick_split_dir(root, {"valid", "dev"});
  const std::string test_dir = detail::pick_split_dir(root, {"test"});
  if (train_dir.empty() || valid_dir.empty() || test_dir.empty())
    throw DataError("unrecognized dataset layout under " + root +
                    " (expected train/, valid/ (or dev/), test/ with seq.in files)");
  RawSplits s;
  s.train = detail::load_split(train_dir, root + "/train");
  s.valid = detail::load_split(valid_dir, root + "/valid");
  s.test = detail::load_split(test_dir, root + "/test");
  return s;
}

// Vocabulary over the training split only; tokens below min_count fold into
// UNK at encode time.
inline Vocabulary build_vocab(const std::vector<RawExample>& train, int min_count = 1) {
  if (train.empty()) throw DataError("cannot build a vocabulary from an empty split");
  Vocabulary vocab;
  if (min_count <= 1) {
    for (const RawExample& ex : train)
      for (const std::string& tok : ex.tokens) vocab.add(tok);
    return vocab;
  }
  std::unordered_map<std::string, int> freq;
  for (const RawExample& ex : train)
    for (const std::string& tok : ex.tokens) ++freq[tok];
  for (const RawExample& ex : train)
    for (const std::string& tok : ex.tokens)
      if (freq[tok] >= min_count) vocab.add(tok);
  return vocab;
}

// Union label inventory in first-occurrence order train -> valid -> test.
inline LabelMaps build_label_maps(const RawSplits& splits) {
  LabelMaps maps;
  for (const auto* split : {&splits.train, &splits.valid, &splits.test}) {
    for (const RawExample& ex : *split) {
      maps.add_intent(ex.intent);
      for (const std::string& tag : ex.slot_tags) maps.add_slot(tag);
    }
  }
  return maps;
}

inline EncodedExample encode(const RawExample& raw, const Vocabulary& vocab,
                             const LabelMaps& labels, int max_seq_len, int* truncated = nullptr) {
  EncodedExample ex;
  const int n = static_cast<int>(raw.tokens.size());
  if (n == 0) throw DimensionError("cannot encode an empty utterance");
  ex.valid_len = n;
  if (n > max_seq_len) {
    ex.valid_len = max_seq_len;
    if (truncated) ++*truncated;
  }
  ex.token_ids.assign(static_cast<size_t>(max_seq_len), Vocabulary::kPad);
  ex.slot_ids.assign(static_cast<size_t>(max_seq_len), LabelMaps::kIgnore);
  for (int i = 0; i < ex.valid_len; ++i) {
    ex.token_ids[static_cast<size_t>(i)] = vocab.lookup(raw.tokens[static_cast<size_t>(i)]);
    ex.slot_ids[static_cast<size_t>(i)] = labels.slot_id(raw.slot_tags[static_cast<size_t>(i)]);
  }
  ex.intent_id = labels.intent_id(raw.intent);
  return ex;
}

inline EncodedDataset encode_split(const std::vector<RawExample>& split, const Vocabulary& vocab,
                                   const LabelMaps& labels, int max_seq_len) {
  EncodedDataset out;
  out.examples.reserve(split.size());
  for (const RawExample& ex : split)
    out.examples.push_back(encode(ex, vocab, labels, max_seq_len, &out.truncated));
  return out;
}

struct CoverageReport {
  int covered = 0;
  int uncovered = 0;
};

// Loads pre-trained word vectors in line-oriented text format ("token v1 ..
// vd"). Rows for in-vocabulary tokens are copied from the file; PAD stays
// all-zero; UNK and uncovered tokens draw from a seeded normal(0, 0.1). The
// file may contain a superset vocabulary; only needed rows are kept.
inline Tensor<float> load_word_vectors(const std::string& path, const Vocabulary& vocab,
                                       int dim, uint64_t seed, CoverageReport* report = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open word-vector file " + path);
  Tensor<float> table({vocab.size(), dim});
  std::vector<bool> found(static_cast<size_t>(vocab.size()), false);
  std::string line;
  size_t line_no = 0;
  int file_dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(std::move(line));
    if (line.empty()) continue;
    // Cheap field count first; float parsing only for rows we keep.
    int fields = 0;
    for (size_t i = 0; i < line.size(); ++i)
      if (line[i] != ' ' && (i == 0 || line[i - 1] == ' ')) ++fields;
    if (fields < 2)
      throw DataError(path + " line " + std::to_string(line_no) + ": no vector fields");
    if (file_dim == -1) {
      file_dim = fields - 1;
      if (file_dim != dim)
        throw ConfigError(path + ": file has " + std::to_string(file_dim) +
                          "-dimensional vectors, expected " + std::to_string(dim));
    } else if (fields - 1 != file_dim) {
      throw DataError(path + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(file_dim) + " components, found " +
                      std::to_string(fields - 1));
    }
    const size_t sp = line.find(' ');
    const std::string tok = line.substr(0, sp);
    const int id = vocab.lookup(tok);
    if (id == Vocabulary::kUnk && tok != Vocabulary::kUnkToken) continue;
    std::istringstream vals(line.substr(sp + 1));
    float* row = table.row(id);
    int got = 0;
    double v;
    while (vals >> v && got < dim) row[got++] = static_cast<float>(v);
    if (got != dim)
      throw DataError(path + " line " + std::to_string(line_no) + ": non-numeric vector field");
    found[static_cast<size_t>(id)] = true;
  }
  std::mt19937 rng(static_cast<uint32_t>(seed));
  std::normal_distribution<double> init(0.0, 0.1);
  CoverageReport cov;
  for (int id = 0; id < vocab.size(); ++id) {
    if (id == Vocabulary::kPad) {
      std::fill(table.row(id), table.row(id) + dim, 0.0f);  // PAD contract
      continue;
    }
    if (found[static_cast<size_t>(id)]) {
      ++cov.covered;
    } else {
      ++cov.uncovered;
      float* row = table.row(id);
      for (int j = 0; j < dim; ++j) row[j] = static_cast<float>(init(rng));
    }
  }
  if (report) *report = cov;
  return table;
}

}  // namespace cnlu
