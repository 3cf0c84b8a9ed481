// Acceptance gate: trains, prunes, distills and benchmarks the joint model on
// the bundled datasets, then runs the property suites. Prints one PASS/FAIL
// line per criterion (ordered summary on stdout, live progress on stderr) and
// exits with the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cnlu/bench.hpp"
#include "cnlu/checkpoint.hpp"
#include "cnlu/distill.hpp"
#include "cnlu/grad_check.hpp"
#include "cnlu/metrics.hpp"
#include "cnlu/pruning.hpp"
#include "cnlu/train.hpp"

namespace fs = std::filesystem;
using namespace cnlu;

namespace {

// ATIS/Snips training recipe. The architecture is fixed (C=300, k=5, d=100,
// alpha=0.2, dropout 0.5); the optimizer settings below were selected on the
// dev split only.
constexpr uint64_t kSeed = 13;
constexpr double kLr = 1e-3;
constexpr int kBatch = 32;
constexpr int kPatience = 10;
constexpr int kEpochs = 60;

const std::string kOutDir = "acceptance_out";

std::chrono::steady_clock::time_point g_start = std::chrono::steady_clock::now();

std::ostream& note() {
  const double mins = std::chrono::duration<double>(std::chrono::steady_clock::now() - g_start)
                          .count() /
                      60.0;
  std::ostringstream prefix;
  prefix << std::fixed << std::setprecision(1) << "[" << mins << "m] ";
  std::cerr << prefix.str();
  return std::cerr;
}

struct Gate {
  std::vector<std::string> lines = std::vector<std::string>(11);
  int failed = 0;

  void report(int idx, bool ok, const std::string& detail) {
    std::ostringstream line;
    line << "criterion " << std::setw(2) << idx << "  " << (ok ? "PASS" : "FAIL") << "  "
         << detail;
    lines[static_cast<size_t>(idx)] = line.str();
    note() << line.str() << "\n";
    if (!ok) ++failed;
  }
};

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * v;
  return s.str();
}

struct Corpus {
  Vocabulary vocab;
  LabelMaps labels;
  Tensor<float> embeddings;
  EncodedDataset train, valid, test;
};

Corpus load_corpus(const std::string& root, const std::string& vectors, int max_seq_len,
                   uint64_t seed) {
  Corpus c;
  RawSplits raw = load_dataset(root);
  c.vocab = build_vocab(raw.train);
  c.labels = build_label_maps(raw);
  CoverageReport cov;
  c.embeddings = load_word_vectors(vectors, c.vocab, 100, seed, &cov);
  note() << root << ": vocab " << c.vocab.size() << " (" << cov.uncovered
         << " uncovered), intents " << c.labels.num_intents() << ", slots "
         << c.labels.num_slots() << "\n";
  c.train = encode_split(raw.train, c.vocab, c.labels, max_seq_len);
  c.valid = encode_split(raw.valid, c.vocab, c.labels, max_seq_len);
  c.test = encode_split(raw.test, c.vocab, c.labels, max_seq_len);
  return c;
}

TrainConfig recipe() {
  TrainConfig tc;
  tc.lr = kLr;
  tc.batch_size = kBatch;
  tc.patience = kPatience;
  tc.max_epochs = kEpochs;
  tc.seed = kSeed;
  return tc;
}

JointModel train_joint(const Corpus& c, const std::string& tag) {
  ModelConfig mc;  // defaults: C=300, k=5, d=100, alpha=0.2, dropout 0.5
  note() << "training " << tag << " (lr " << kLr << ", batch " << kBatch << ", patience "
         << kPatience << ", seed " << kSeed << ")\n";
  JointModel model = init_model(mc, c.vocab, c.labels, c.embeddings, kSeed);
  TrainResult r = train(std::move(model), c.train.examples, c.valid.examples, recipe(), &std::cerr);
  note() << tag << " best epoch " << r.best_epoch << "\n";
  save_checkpoint(r.model, kOutDir + "/" + tag + ".ckpt");
  return std::move(r.model);
}

// ---------------------------------------------------------------------------
// criterion 6: finite-difference gradient suite

void absorb(GradCheckResult r, double& max_err, int64_t& checked) {
  max_err = std::max(max_err, r.max_rel_err);
  checked += r.checked;
}

void grad_suite_for_seed(uint32_t seed, double& max_err, int64_t& checked) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  auto rand_t = [&](Shape shape) {
    Tensor<double> t(shape);
    for (auto& v : t.data) v = d(rng);
    return t;
  };

  {  // linear layer through the sequence loss
    std::vector<Tensor<double>> ps = {rand_t({2, 3}), rand_t({3, 4}), rand_t({4})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var x = t.leaf(p[0]), w = t.leaf(p[1]), b = t.leaf(p[2]);
                 Var y = linear(t, x, w, b);
                 Var loss = sequence_xent_mean(t, y, std::vector<int>{0, 3}, -1);
                 return BuiltGraph<double>{loss, {x, w, b}};
               },
               ps),
           max_err, checked);
  }
  {  // centered padding + convolution
    std::vector<Tensor<double>> ps = {rand_t({5, 3}), rand_t({4, 3, 3}), rand_t({4})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var x = t.leaf(p[0]), w = t.leaf(p[1]), b = t.leaf(p[2]);
                 Var feat = conv1d(t, pad_centered(t, x, 3), w, b);
                 Var loss =
                     sequence_xent_mean(t, feat, std::vector<int>{0, 1, 2, 3, 0}, -1);
                 return BuiltGraph<double>{loss, {x, w, b}};
               },
               ps),
           max_err, checked);
  }
  {  // max-over-time pooling into a cross-entropy
    std::vector<Tensor<double>> ps = {rand_t({6, 4})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var x = t.leaf(p[0]);
                 PoolResult pool = max_over_time(t, x, 5);
                 Var loss = softmax_xent(t, pool.pooled, static_cast<int>(seed % 4)).loss;
                 return BuiltGraph<double>{loss, {x}};
               },
               ps),
           max_err, checked);
  }
  {  // dropout with a replayed mask
    std::vector<Tensor<double>> ps = {rand_t({4, 5})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var x = t.leaf(p[0]);
                 std::mt19937 mask_rng(1000 + seed);
                 Var y = dropout(t, x, 0.5f, true, mask_rng);
                 Var loss = sequence_xent_mean(t, y, std::vector<int>{1, 2, 3, 4}, -1);
                 return BuiltGraph<double>{loss, {x}};
               },
               ps),
           max_err, checked);
  }
  {  // weighted joint combination
    std::vector<Tensor<double>> ps = {rand_t({3}), rand_t({4})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var a = t.leaf(p[0]), b = t.leaf(p[1]);
                 Var la = softmax_xent(t, a, 1).loss;
                 Var lb = softmax_xent(t, b, 2).loss;
                 Var loss = weighted_sum(t, la, 0.2, lb, 0.8);
                 return BuiltGraph<double>{loss, {a, b}};
               },
               ps),
           max_err, checked);
  }
  {  // distillation loss
    Tensor<double> teacher = rand_t({5});
    std::vector<Tensor<double>> ps = {rand_t({5})};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 Var s = t.leaf(p[0]);
                 Var loss = kd_loss(t, s, teacher, 2.0, 0.4, static_cast<int>(seed % 5));
                 return BuiltGraph<double>{loss, {s}};
               },
               ps),
           max_err, checked);
  }
  {  // composed joint model
    ModelConfig mc;
    mc.embed_dim = 4;
    mc.num_filters = 5;
    mc.kernel_size = 3;
    mc.max_seq_len = 8;
    Vocabulary vocab;
    for (const char* w : {"a", "b", "c", "d"}) vocab.add(w);
    LabelMaps labels;
    for (const char* s : {"x", "y", "z"}) labels.add_intent(s);
    for (const char* s : {"O", "B-p", "I-p", "B-q"}) labels.add_slot(s);
    Tensor<float> emb({vocab.size(), 4});
    std::normal_distribution<float> df(0.f, 0.5f);
    for (auto& v : emb.data) v = df(rng);
    std::fill(emb.row(0), emb.row(0) + 4, 0.f);
    JointModelT<double> md = init_model(mc, vocab, labels, emb, seed).cast<double>();

    EncodedExample ex;
    ex.token_ids = {2, 3, 4, 5, 0, 0, 0, 0};
    ex.valid_len = 4;
    ex.intent_id = static_cast<int>(seed % 3);
    ex.slot_ids = {0, 1, 2, 3, -1, -1, -1, -1};

    std::vector<Tensor<double>> ps = {md.conv_w,   md.conv_b,  md.intent_w,
                                      md.intent_b, md.slot_w,  md.slot_b};
    absorb(grad_check(
               [&](Tape<double>& t, const std::vector<Tensor<double>>& p) {
                 ParamVars<double> pv;
                 pv.conv_w = t.leaf(p[0]);
                 pv.conv_b = t.leaf(p[1]);
                 pv.intent_w = t.leaf(p[2]);
                 pv.intent_b = t.leaf(p[3]);
                 pv.slot_w = t.leaf(p[4]);
                 pv.slot_b = t.leaf(p[5]);
                 std::mt19937 unused(0);
                 LossVars<double> lv = loss_graph(t, md, pv, ex, false, unused);
                 return BuiltGraph<double>{
                     lv.total, {pv.conv_w, pv.conv_b, pv.intent_w, pv.intent_b, pv.slot_w,
                                pv.slot_b}};
               },
               ps),
           max_err, checked);
  }
}

// ---------------------------------------------------------------------------
// criterion 7: splice equivalence against a kept-channel decomposition

double splice_suite_max_diff(int trials) {
  double worst = 0.0;
  std::mt19937 rng(4242);
  constexpr int d = 6, C = 8, k = 3, I = 4, S = 5, V = 7, L = 10;

  ModelConfig mc;
  mc.embed_dim = d;
  mc.num_filters = C;
  mc.kernel_size = k;
  mc.max_seq_len = L;
  Vocabulary vocab;
  for (int i = 0; i < V - 2; ++i) vocab.add("w" + std::to_string(i));
  LabelMaps labels;
  for (int i = 0; i < I; ++i) labels.add_intent("i" + std::to_string(i));
  for (int s = 0; s < S; ++s) labels.add_slot("s" + std::to_string(s));

  std::normal_distribution<float> nf(0.f, 0.7f);
  std::uniform_int_distribution<int> len_dist(2, L - 2);
  std::uniform_int_distribution<int> tok_dist(1, V - 1);

  for (int trial = 0; trial < trials; ++trial) {
    Tensor<float> emb({V, d});
    for (auto& v : emb.data) v = nf(rng);
    std::fill(emb.row(0), emb.row(0) + d, 0.f);
    JointModel m = init_model(mc, vocab, labels, emb, 1 + trial);

    EncodedExample ex;
    const int n = len_dist(rng);
    ex.valid_len = n;
    ex.token_ids.assign(L, 0);
    for (int t = 0; t < n; ++t) ex.token_ids[static_cast<size_t>(t)] = tok_dist(rng);
    ex.intent_id = 0;
    ex.slot_ids.assign(L, -1);

    std::vector<int> removed;
    for (int c = 0; c < C; ++c)
      if (rng() % 2) removed.push_back(c);
    if (removed.empty()) removed.push_back(static_cast<int>(rng() % C));
    if (static_cast<int>(removed.size()) == C) removed.pop_back();
    std::vector<int> kept;
    for (int c = 0; c < C; ++c)
      if (std::find(removed.begin(), removed.end(), c) == removed.end()) kept.push_back(c);

    // Original model's feature map, recomputed in double with centered
    // zero padding.
    const int pad = (k - 1) / 2;
    auto feat = [&](int c, int t) {
      double acc = m.conv_b.data[static_cast<size_t>(c)];
      for (int j = 0; j < k; ++j) {
        const int src = t + j - pad;
        if (src < 0 || src >= n) continue;
        const float* e = m.embeddings.row(ex.token_ids[static_cast<size_t>(src)]);
        const float* w = m.conv_w.ptr() + (static_cast<int64_t>(c) * k + j) * d;
        for (int h = 0; h < d; ++h)
          acc += static_cast<double>(w[h]) * static_cast<double>(e[h]);
      }
      return acc;
    };

    JointModel spliced = splice_filters(m, removed);
    InferenceEngine<float> engine(spliced);
    auto out = engine.forward(ex);

    for (int i = 0; i < I; ++i) {
      double z = m.intent_b.data[static_cast<size_t>(i)];
      for (int c : kept) {
        double pooled = feat(c, 0);
        for (int t = 1; t < n; ++t) pooled = std::max(pooled, feat(c, t));
        z += pooled * static_cast<double>(m.intent_w.at(c, i));
      }
      worst = std::max(worst, std::abs(z - static_cast<double>(out.intent_logits[i])));
    }
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < S; ++s) {
        double z = m.slot_b.data[static_cast<size_t>(s)];
        for (int c : kept) z += feat(c, t) * static_cast<double>(m.slot_w.at(c, s));
        worst = std::max(worst, std::abs(z - static_cast<double>(out.slot_logits[t * S + s])));
      }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// criterion 8: exhaustive chunk oracle

std::vector<Chunk> oracle_chunks(const std::vector<std::string>& tags) {
  const int n = static_cast<int>(tags.size());
  auto type_of = [&](int i) { return tags[static_cast<size_t>(i)].substr(2); };
  auto tagged = [&](int i) { return tags[static_cast<size_t>(i)] != "O"; };
  std::vector<Chunk> out;
  for (int s = 0; s < n; ++s) {
    if (!tagged(s)) continue;
    const std::string ty = type_of(s);
    // B- always opens; lenient I-start opens unless the previous position
    // belongs to a chunk of the same type.
    const bool opens = tags[static_cast<size_t>(s)][0] == 'B' || s == 0 || !tagged(s - 1) ||
                       type_of(s - 1) != ty;
    if (!opens) continue;
    int e = s;
    while (e + 1 < n && tags[static_cast<size_t>(e + 1)] == "I-" + ty) ++e;
    out.push_back({ty, s, e});
  }
  return out;
}

bool chunk_suite(int64_t& sequences, int64_t& pairs, std::string& fail_note) {
  const std::vector<std::string> alphabet = {"O", "B-a", "I-a", "B-b", "I-b"};
  std::vector<std::vector<std::string>> all;
  std::vector<std::vector<std::string>> frontier = {{}};
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : frontier)
      for (const auto& tag : alphabet) {
        auto seq = prefix;
        seq.push_back(tag);
        next.push_back(std::move(seq));
      }
    frontier = std::move(next);
    all.insert(all.end(), frontier.begin(), frontier.end());
  }
  sequences = static_cast<int64_t>(all.size());

  for (const auto& seq : all) {
    auto got = extract_chunks(seq);
    auto want = oracle_chunks(seq);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) {
      std::string s;
      for (const auto& t : seq) s += t + " ";
      fail_note = "chunk mismatch on [" + s + "]";
      return false;
    }
  }

  // Micro-averaged F1 equality on random batches of (pred, gold) pairs.
  std::mt19937 rng(99);
  std::uniform_int_distribution<size_t> pick(0, all.size() - 1);
  pairs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> pred, gold;
    const int batch = 1 + static_cast<int>(rng() % 8);
    for (int b = 0; b < batch; ++b) {
      size_t gi = pick(rng);
      const auto& g = all[gi];
      // Draw a prediction of the same length.
      std::vector<std::string> p;
      for (size_t i = 0; i < g.size(); ++i) p.push_back(alphabet[rng() % alphabet.size()]);
      pred.push_back(std::move(p));
      gold.push_back(g);
      ++pairs;
    }
    F1Result got = slot_f1(pred, gold);

    int64_t matched = 0, np = 0, ng = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
      auto pc = oracle_chunks(pred[i]);
      auto gc = oracle_chunks(gold[i]);
      std::sort(pc.begin(), pc.end());
      std::sort(gc.begin(), gc.end());
      std::vector<Chunk> inter;
      std::set_intersection(pc.begin(), pc.end(), gc.begin(), gc.end(),
                            std::back_inserter(inter));
      matched += static_cast<int64_t>(inter.size());
      np += static_cast<int64_t>(pc.size());
      ng += static_cast<int64_t>(gc.size());
    }
    const double P = np ? static_cast<double>(matched) / static_cast<double>(np) : 0.0;
    const double R = ng ? static_cast<double>(matched) / static_cast<double>(ng) : 0.0;
    const double F = (P + R) > 0 ? 2 * P * R / (P + R) : 0.0;
    if (std::abs(got.f1 - F) > 1e-12 || got.matched != matched) {
      fail_note = "batch F1 disagreement";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// criterion 9: determinism on a 50-sample subset

bool determinism_suite(const std::string& atis_root, const std::string& vectors,
                       std::string& detail) {
  RawSplits raw = load_dataset(atis_root);
  RawSplits sub;
  sub.train.assign(raw.train.begin(), raw.train.begin() + 50);
  sub.valid.assign(raw.valid.begin(), raw.valid.begin() + 50);
  Vocabulary vocab = build_vocab(sub.train);
  LabelMaps labels = build_label_maps(sub);
  Tensor<float> emb = load_word_vectors(vectors, vocab, 100, 7);
  EncodedDataset train_set = encode_split(sub.train, vocab, labels, 50);
  EncodedDataset dev_set = encode_split(sub.valid, vocab, labels, 50);

  ModelConfig mc;
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.patience = 3;
  tc.seed = 7;

  std::vector<std::string> paths;
  for (int run = 0; run < 2; ++run) {
    JointModel m = init_model(mc, vocab, labels, emb, tc.seed);
    TrainResult r = train(std::move(m), train_set.examples, dev_set.examples, tc, nullptr);
    const std::string path = kOutDir + "/determinism_run" + std::to_string(run) + ".ckpt";
    save_checkpoint(r.model, path);
    paths.push_back(path);
  }
  std::ifstream a(paths[0], std::ios::binary), b(paths[1], std::ios::binary);
  const std::vector<char> ba((std::istreambuf_iterator<char>(a)), {});
  const std::vector<char> bb((std::istreambuf_iterator<char>(b)), {});
  detail = "two runs, " + std::to_string(ba.size()) + " checkpoint bytes";
  return !ba.empty() && ba == bb;
}

const SparsityCurvePoint* point_at(const std::vector<SparsityCurvePoint>& curve, int filters) {
  for (const auto& p : curve)
    if (p.filters == filters) return &p;
  return nullptr;
}

}  // namespace

int main() {
  const std::string repo = CNLU_REPO_DIR;
  const std::string atis = repo + "/data/atis";
  const std::string snips = repo + "/data/snips";
  const std::string vectors = repo + "/data/glove.6B.100d.filtered.txt";
  fs::create_directories(kOutDir);
  Gate gate;

  // -------- property suites (seconds) --------
  {
    double max_err = 0.0;
    int64_t checked = 0;
    constexpr uint32_t kSeeds = 20;
    for (uint32_t s = 0; s < kSeeds; ++s) grad_suite_for_seed(s, max_err, checked);
    std::ostringstream d;
    d << std::scientific << std::setprecision(2) << "7 graph families x " << kSeeds
      << " seeds, " << checked << " partials, max rel err " << max_err << " (< 1e-6)";
    gate.report(6, max_err < 1e-6 && checked > 0, d.str());
  }
  {
    const double worst = splice_suite_max_diff(100);
    std::ostringstream d;
    d << std::scientific << std::setprecision(2)
      << "100 random models/inputs, max |spliced - decomposed| " << worst << " (<= 1e-5)";
    gate.report(7, worst <= 1e-5, d.str());
  }
  {
    int64_t sequences = 0, pairs = 0;
    std::string fail_note;
    const bool ok = chunk_suite(sequences, pairs, fail_note);
    std::ostringstream d;
    d << sequences << " IOB sequences (len <= 6, 2 types) match the span oracle; " << pairs
      << " random pairs scored identically";
    gate.report(8, ok, ok ? d.str() : fail_note);
  }
  {
    const std::vector<int> counts = schedule_filter_counts(300, 0.1, 0.5);
    const std::vector<int> want = {270, 240, 210, 180, 150};
    bool ok = counts == want;

    ModelConfig mc;
    Vocabulary vocab;
    vocab.add("w");
    LabelMaps labels;
    for (int i = 0; i < 21; ++i) labels.add_intent("i" + std::to_string(i));
    for (int s = 0; s < 120; ++s) labels.add_slot("s" + std::to_string(s));
    Tensor<float> emb = Tensor<float>::zeros({vocab.size(), 100});
    JointModel m = init_model(mc, vocab, labels, emb, 1);
    int64_t prev = count_params(m);
    std::ostringstream seq;
    seq << "counts {";
    for (size_t i = 0; i < counts.size(); ++i) {
      m = prune_step(m, PruneNorm::kL2, m.num_filters() - counts[i]);
      const int64_t params = count_params(m);
      ok = ok && m.num_filters() == want[i] && params < prev;
      prev = params;
      seq << (i ? "," : "") << counts[i];
    }
    seq << "}, params strictly decreasing to " << prev;
    gate.report(10, ok, seq.str());
  }

  // -------- determinism (under a minute) --------
  {
    std::string detail;
    const bool ok = determinism_suite(atis, vectors, detail);
    gate.report(9, ok, detail + (ok ? ", byte-identical" : ", checkpoints differ"));
  }

  // -------- full training pipeline --------
  Corpus ac = load_corpus(atis, vectors, 50, kSeed);
  JointModel base = train_joint(ac, "atis_base");
  {
    EvalResult ev = evaluate(base, ac.test.examples);
    const int64_t params = count_params(base);
    const bool ok =
        ev.intent_accuracy >= 0.935 && ev.slot.f1 >= 0.925 && params >= 190000 && params <= 196000;
    std::ostringstream d;
    d << "ATIS uncompressed: intent " << pct(ev.intent_accuracy) << " (>= 93.50), slot F1 "
      << pct(ev.slot.f1) << " (>= 92.50), params " << params << " (in [190000, 196000])";
    gate.report(1, ok, d.str());
  }

  // One iterative schedule to 95% sparsity covers the 50/80/90/95% points.
  PruneSchedule schedule;
  schedule.norm = PruneNorm::kL2;
  schedule.mode = PruneMode::kIterative;
  schedule.step_fraction = 0.1;
  schedule.target_sparsity = 0.95;
  schedule.retrain = recipe();
  CurveSaver saver = [](const JointModel& m, const SparsityCurvePoint&) {
    const std::string path = kOutDir + "/pruned_f" + std::to_string(m.num_filters()) + ".ckpt";
    save_checkpoint(m, path);
    return path;
  };
  note() << "iterative pruning to 95% sparsity (step 10%)\n";
  const std::vector<SparsityCurvePoint> curve =
      prune_iterative(base, ac.train.examples, ac.valid.examples, ac.test.examples, schedule,
                      saver, &std::cerr);
  write_curve(curve, kOutDir + "/pruned_curve.tsv");

  {
    const SparsityCurvePoint* p = point_at(curve, 150);
    bool ok = p && p->intent_acc >= 0.935 && p->slot_f1 >= 0.925 && p->params >= 94000 &&
              p->params <= 99000;
    std::ostringstream d;
    if (p)
      d << "ATIS pruned to 150 filters: intent " << pct(p->intent_acc)
        << " (>= 93.50), slot F1 " << pct(p->slot_f1) << " (>= 92.50), params " << p->params
        << " (in [94000, 99000])";
    else
      d << "no 150-filter point on the pruning curve";
    gate.report(2, ok, d.str());
  }

  // Distilled students at the 90% and 95% compression points.
  std::vector<SparsityCurvePoint> distilled_curve;
  EvalResult dist90, dist95;
  for (double comp : {0.9, 0.95}) {
    DistillConfig dc;
    dc.student = base.config;
    dc.student.num_filters = student_filters_for_compression(base.num_filters(), comp);
    dc.train = recipe();
    note() << "distilling " << dc.student.num_filters << "-filter student\n";
    DistillResult dr = distill(base, dc, ac.train.examples, ac.valid.examples, &std::cerr);
    EvalResult ev = evaluate(dr.student, ac.test.examples);
    const std::string ckpt =
        kOutDir + "/student_f" + std::to_string(dr.student.num_filters()) + ".ckpt";
    save_checkpoint(dr.student, ckpt);
    distilled_curve.push_back({dr.student.num_filters(), count_params(dr.student),
                               compression_rate(base.num_filters(), dr.student),
                               ev.intent_accuracy, ev.slot.f1, ckpt});
    (comp == 0.9 ? dist90 : dist95) = ev;
  }
  write_curve(distilled_curve, kOutDir + "/distilled_curve.tsv");

  {
    const SparsityCurvePoint* p80 = point_at(curve, 60);
    const SparsityCurvePoint* p90 = point_at(curve, 30);
    const SparsityCurvePoint* p95 = point_at(curve, 15);
    bool ok = p80 && p90 && p95;
    std::ostringstream d;
    if (ok) {
      const bool c80 = p80->intent_acc >= 0.924;
      const bool c90 = p90->intent_acc - dist90.intent_accuracy >= 0.05;
      const bool c95 = p95->slot_f1 > dist95.slot.f1;
      ok = c80 && c90 && c95;
      d << "80%: pruned intent " << pct(p80->intent_acc) << " (>= 92.40); 90%: pruned "
        << pct(p90->intent_acc) << " vs distilled " << pct(dist90.intent_accuracy)
        << " (gap >= 5.00); 95%: pruned slot F1 " << pct(p95->slot_f1) << " > distilled "
        << pct(dist95.slot.f1);
    } else {
      d << "missing 60/30/15-filter points on the pruning curve";
    }
    gate.report(3, ok, d.str());
  }

  // -------- latency (paired run) --------
  {
    JointModel pruned150 = load_checkpoint(kOutDir + "/pruned_f150.ckpt");
    note() << "benchmarking unpruned vs 150-filter models\n";
    LatencyReport full = bench_latency(base, ac.test.examples, 50);
    LatencyReport half = bench_latency(pruned150, ac.test.examples, 50);
    const bool ok = half.mean_ms < 2.0 && half.mean_ms <= full.mean_ms;
    std::ostringstream d;
    d << std::fixed << std::setprecision(3) << "pruned " << half.mean_ms
      << " ms/sample (< 2.000) vs unpruned " << full.mean_ms << " (pruned <= unpruned), "
      << full.samples << " samples, hardware: " << full.hardware;
    gate.report(5, ok, d.str());
  }

  // -------- Snips --------
  {
    Corpus sc = load_corpus(snips, vectors, 50, kSeed);
    JointModel sm = train_joint(sc, "snips_base");
    EvalResult ev = evaluate(sm, sc.test.examples);
    const bool ok = ev.intent_accuracy >= 0.95 && ev.slot.f1 >= 0.81;
    std::ostringstream d;
    d << "Snips uncompressed: intent " << pct(ev.intent_accuracy) << " (>= 95.00), slot F1 "
      << pct(ev.slot.f1) << " (>= 81.00)";
    gate.report(4, ok, d.str());
  }

  std::cout << "\n";
  for (int i = 1; i <= 10; ++i) std::cout << gate.lines[static_cast<size_t>(i)] << "\n";
  std::cout << (gate.failed == 0 ? "ALL CRITERIA PASSED"
                                 : std::to_string(gate.failed) + " CRITERIA FAILED")
            << "\n";
  return gate.failed;
}
