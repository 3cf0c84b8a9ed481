// Command-line front end: train, eval, prune, distill, compare, flips, bench.
// Exit codes: 0 success, 2 usage, 3 data/format, 4 numeric failure.
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "cnlu/bench.hpp"
#include "cnlu/checkpoint.hpp"
#include "cnlu/distill.hpp"
#include "cnlu/manifest.hpp"
#include "cnlu/metrics.hpp"
#include "cnlu/pruning.hpp"
#include "cnlu/train.hpp"

namespace fs = std::filesystem;
using namespace cnlu;

namespace {

struct SharedArgs {
  std::string data;
  std::string vectors;
  std::string checkpoint;
  std::string out;
  uint64_t seed = 1;
};

void add_train_flags(CLI::App* cmd, TrainConfig& tc) {
  cmd->add_option("--batch", tc.batch_size, "mini-batch size")->capture_default_str();
  cmd->add_option("--epochs", tc.max_epochs, "epoch budget")->capture_default_str();
  cmd->add_option("--patience", tc.patience, "early-stopping patience")->capture_default_str();
  cmd->add_option("--lr", tc.lr, "Adam learning rate")->capture_default_str();
}

std::string out_path(const SharedArgs& a, const std::string& file) {
  fs::create_directories(a.out);
  return (fs::path(a.out) / file).string();
}

void fill_manifest(RunManifest& m, const SharedArgs& a, const TrainConfig* tc = nullptr) {
  m.set("seed", a.seed);
  if (!a.data.empty()) {
    m.set("data", a.data);
    m.set("data_checksum", dataset_fingerprint(a.data));
  }
  if (!a.vectors.empty()) {
    m.set("vectors", a.vectors);
    m.set("vectors_checksum", to_hex(fnv1a64_file(a.vectors)));
  }
  if (!a.checkpoint.empty()) m.set("checkpoint", a.checkpoint);
  if (tc) {
    m.set("batch", tc->batch_size);
    m.set("epochs", tc->max_epochs);
    m.set("patience", tc->patience);
    m.set("lr", tc->lr);
  }
}

void finish_manifest(RunManifest& m, const SharedArgs& a, const std::string& artifacts) {
  m.set("artifacts", artifacts);
  m.set("finished_at", now_iso8601());
  m.write(out_path(a, "manifest.tsv"));
}

struct EncodedSplits {
  EncodedDataset train, valid, test;
};

// Encodes a dataset with a trained model's own vocabulary and label maps.
EncodedSplits encode_for_model(const JointModel& m, const std::string& root) {
  RawSplits raw = load_dataset(root);
  EncodedSplits out;
  out.train = encode_split(raw.train, m.vocab, m.labels, m.config.max_seq_len);
  out.valid = encode_split(raw.valid, m.vocab, m.labels, m.config.max_seq_len);
  out.test = encode_split(raw.test, m.vocab, m.labels, m.config.max_seq_len);
  return out;
}

const std::vector<EncodedExample>& pick_split(const EncodedSplits& s, const std::string& name) {
  if (name == "train") return s.train.examples;
  if (name == "valid") return s.valid.examples;
  if (name == "test") return s.test.examples;
  throw ConfigError("unknown split '" + name + "' (expected train, valid or test)");
}

void write_metrics(const std::string& path, const JointModel& m, const EvalResult& ev,
                   const std::string& split) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open metrics file for writing: " + path);
  out << "split\tsamples\tparams\tfilters\tintent_acc\tslot_f1\tslot_precision\tslot_recall\n";
  out << std::fixed << std::setprecision(6);
  out << split << '\t' << ev.samples << '\t' << count_params(m) << '\t' << m.num_filters()
      << '\t' << ev.intent_accuracy << '\t' << ev.slot.f1 << '\t' << ev.slot.precision << '\t'
      << ev.slot.recall << '\n';
}

void print_eval(const JointModel& m, const EvalResult& ev) {
  std::cout << std::fixed << std::setprecision(2);
  std::cout << "params " << count_params(m) << " (" << m.num_filters() << " filters)";
  if (ev.has_intent) std::cout << "  intent_acc " << 100.0 * ev.intent_accuracy;
  if (ev.has_slot) std::cout << "  slot_f1 " << 100.0 * ev.slot.f1;
  std::cout << "\n";
}

int cmd_train(const SharedArgs& a, const ModelConfig& mc, const TrainConfig& tc, int min_count) {
  RunManifest man = make_manifest("train");
  fill_manifest(man, a, &tc);
  man.set("task", task_mode_name(mc.task_mode));
  man.set("alpha", mc.alpha);
  man.set("filters", mc.num_filters);
  man.set("kernel", mc.kernel_size);
  man.set("dim", mc.embed_dim);
  man.set("dropout", mc.dropout_p);
  man.set("max_seq_len", mc.max_seq_len);
  man.set("min_count", min_count);

  RawSplits raw = load_dataset(a.data);
  Vocabulary vocab = build_vocab(raw.train, min_count);
  LabelMaps labels = build_label_maps(raw);
  CoverageReport cov;
  Tensor<float> emb = load_word_vectors(a.vectors, vocab, mc.embed_dim, a.seed, &cov);
  std::cout << "vocab " << vocab.size() << " (" << cov.covered << " covered, " << cov.uncovered
            << " uncovered)  intents " << labels.num_intents() << "  slots "
            << labels.num_slots() << "\n";

  EncodedDataset train_set = encode_split(raw.train, vocab, labels, mc.max_seq_len);
  EncodedDataset dev_set = encode_split(raw.valid, vocab, labels, mc.max_seq_len);
  EncodedDataset test_set = encode_split(raw.test, vocab, labels, mc.max_seq_len);
  if (train_set.truncated + dev_set.truncated + test_set.truncated > 0)
    std::cout << "truncated " << train_set.truncated << "/" << dev_set.truncated << "/"
              << test_set.truncated << " utterances to " << mc.max_seq_len << " tokens\n";

  JointModel model = init_model(mc, std::move(vocab), std::move(labels), std::move(emb), a.seed);
  std::cout << "training " << task_mode_name(mc.task_mode) << " model, params "
            << count_params(model) << "\n";
  TrainResult r = train(std::move(model), train_set.examples, dev_set.examples, tc, &std::cout);

  const std::string ckpt = out_path(a, "model.ckpt");
  save_checkpoint(r.model, ckpt);
  {
    std::ofstream hist(out_path(a, "history.tsv"), std::ios::trunc);
    hist << "epoch\ttrain_loss\tdev_intent_acc\tdev_slot_f1\timproved\n";
    hist << std::fixed << std::setprecision(6);
    for (const EpochStats& e : r.history)
      hist << e.epoch << '\t' << e.train_loss << '\t' << e.dev_intent_acc << '\t' << e.dev_slot_f1
           << '\t' << (e.improved ? 1 : 0) << '\n';
  }
  EvalResult ev = evaluate(r.model, test_set.examples);
  write_metrics(out_path(a, "metrics.tsv"), r.model, ev, "test");
  std::cout << "best epoch " << r.best_epoch << (r.diverged ? " (diverged)" : "") << "\ntest: ";
  print_eval(r.model, ev);

  man.set("best_epoch", r.best_epoch);
  man.set("diverged", r.diverged ? 1 : 0);
  finish_manifest(man, a, ckpt + ",history.tsv,metrics.tsv");
  return 0;
}

int cmd_eval(const SharedArgs& a, const std::string& split) {
  RunManifest man = make_manifest("eval");
  fill_manifest(man, a);
  man.set("split", split);
  JointModel m = load_checkpoint(a.checkpoint);
  EncodedSplits s = encode_for_model(m, a.data);
  EvalResult ev = evaluate(m, pick_split(s, split));
  print_eval(m, ev);
  write_metrics(out_path(a, "metrics.tsv"), m, ev, split);
  finish_manifest(man, a, "metrics.tsv");
  return 0;
}

int cmd_prune(const SharedArgs& a, PruneSchedule& schedule, const std::string& mode_name,
              const std::string& norm_name, bool include_baseline) {
  RunManifest man = make_manifest("prune");
  fill_manifest(man, a, &schedule.retrain);
  man.set("mode", mode_name);
  man.set("norm", norm_name);
  man.set("target", schedule.target_sparsity);
  man.set("step", schedule.step_fraction);
  man.set("include_baseline", include_baseline ? 1 : 0);
  schedule.validate();

  JointModel base = load_checkpoint(a.checkpoint);
  EncodedSplits s = encode_for_model(base, a.data);
  const int c0 = base.num_filters();

  std::vector<SparsityCurvePoint> curve;
  if (include_baseline) {
    EvalResult ev = evaluate(base, s.test.examples);
    curve.push_back({c0, count_params(base), 0.0, ev.intent_accuracy, ev.slot.f1, a.checkpoint});
  }

  if (schedule.mode == PruneMode::kOneShot) {
    JointModel pruned = prune_one_shot(base, schedule);
    const std::string ckpt = out_path(a, "pruned.ckpt");
    save_checkpoint(pruned, ckpt);
    EvalResult ev = evaluate(pruned, s.test.examples);
    curve.push_back({pruned.num_filters(), count_params(pruned), compression_rate(c0, pruned),
                     ev.intent_accuracy, ev.slot.f1, ckpt});
    std::cout << "one-shot pruned " << c0 << " -> " << pruned.num_filters() << " filters\n";
    print_eval(pruned, ev);
  } else {
    CurveSaver saver = [&](const JointModel& m, const SparsityCurvePoint&) {
      const std::string ckpt = out_path(a, "pruned_f" + std::to_string(m.num_filters()) + ".ckpt");
      save_checkpoint(m, ckpt);
      return ckpt;
    };
    std::vector<SparsityCurvePoint> pts = prune_iterative(
        base, s.train.examples, s.valid.examples, s.test.examples, schedule, saver, &std::cout);
    curve.insert(curve.end(), std::make_move_iterator(pts.begin()),
                 std::make_move_iterator(pts.end()));
  }
  const std::string curve_path = out_path(a, "curve.tsv");
  write_curve(curve, curve_path);
  std::cout << "curve with " << curve.size() << " points -> " << curve_path << "\n";
  finish_manifest(man, a, curve_path);
  return 0;
}

int cmd_distill(const SharedArgs& a, std::vector<double> compressions, double temperature,
                double lambda, const TrainConfig& tc) {
  RunManifest man = make_manifest("distill");
  fill_manifest(man, a, &tc);
  man.set("temperature", temperature);
  man.set("lambda", lambda);
  {
    std::string cs;
    for (double c : compressions) cs += (cs.empty() ? "" : ",") + std::to_string(c);
    man.set("compression", cs);
  }

  JointModel teacher = load_checkpoint(a.checkpoint);
  EncodedSplits s = encode_for_model(teacher, a.data);
  const int c0 = teacher.num_filters();
  std::sort(compressions.begin(), compressions.end());

  std::vector<SparsityCurvePoint> curve;
  for (double comp : compressions) {
    DistillConfig dc;
    dc.temperature = temperature;
    dc.lambda = lambda;
    dc.student = teacher.config;
    dc.student.num_filters = student_filters_for_compression(c0, comp);
    dc.train = tc;
    dc.train.seed = a.seed;
    std::cout << "distilling student with " << dc.student.num_filters << "/" << c0
              << " filters\n";
    DistillResult dr = distill(teacher, dc, s.train.examples, s.valid.examples, &std::cout);
    const std::string ckpt =
        out_path(a, "student_f" + std::to_string(dr.student.num_filters()) + ".ckpt");
    save_checkpoint(dr.student, ckpt);
    EvalResult ev = evaluate(dr.student, s.test.examples);
    curve.push_back({dr.student.num_filters(), count_params(dr.student),
                     compression_rate(c0, dr.student), ev.intent_accuracy, ev.slot.f1, ckpt});
    print_eval(dr.student, ev);
  }
  const std::string curve_path = out_path(a, "curve.tsv");
  write_curve(curve, curve_path);
  std::cout << "curve with " << curve.size() << " points -> " << curve_path << "\n";
  finish_manifest(man, a, curve_path);
  return 0;
}

// Curves keyed by compression rate rounded to basis points.
std::map<int, SparsityCurvePoint> curve_by_compression(
    const std::vector<SparsityCurvePoint>& curve) {
  std::map<int, SparsityCurvePoint> out;
  for (const auto& p : curve) out[static_cast<int>(std::lround(p.compression_rate * 1e4))] = p;
  return out;
}

int cmd_compare(const SharedArgs& a, const std::string& pruned_path,
                const std::string& distilled_path) {
  RunManifest man = make_manifest("compare");
  fill_manifest(man, a);
  man.set("pruned_curve", pruned_path);
  man.set("distilled_curve", distilled_path);

  auto pruned = curve_by_compression(read_curve(pruned_path));
  auto distilled = curve_by_compression(read_curve(distilled_path));

  std::vector<int> grid;
  for (const auto& [k, _] : pruned) grid.push_back(k);
  for (const auto& [k, _] : distilled)
    if (!pruned.count(k)) grid.push_back(k);
  std::sort(grid.begin(), grid.end());
  size_t shared = 0;
  for (int k : grid) shared += pruned.count(k) && distilled.count(k);
  if (shared != grid.size())
    std::cerr << "warning: compression grids differ; " << shared << " of " << grid.size()
              << " points shared, unmatched cells marked '-'\n";

  const std::string combined_path = out_path(a, "combined.tsv");
  {
    std::ofstream out(combined_path, std::ios::trunc);
    out << "compression_rate\tpruned_filters\tpruned_params\tpruned_acc\tpruned_f1"
           "\tdistilled_filters\tdistilled_params\tdistilled_acc\tdistilled_f1\n";
    out << std::fixed << std::setprecision(6);
    for (int k : grid) {
      out << static_cast<double>(k) / 1e4;
      if (auto it = pruned.find(k); it != pruned.end())
        out << '\t' << it->second.filters << '\t' << it->second.params << '\t'
            << it->second.intent_acc << '\t' << it->second.slot_f1;
      else
        out << "\t-\t-\t-\t-";
      if (auto it = distilled.find(k); it != distilled.end())
        out << '\t' << it->second.filters << '\t' << it->second.params << '\t'
            << it->second.intent_acc << '\t' << it->second.slot_f1;
      else
        out << "\t-\t-\t-\t-";
      out << '\n';
    }
  }

  // Text table with per-cell deltas against each column's 0%-compression row.
  const SparsityCurvePoint* p0 = pruned.count(0) ? &pruned.at(0) : nullptr;
  const SparsityCurvePoint* d0 = distilled.count(0) ? &distilled.at(0) : nullptr;
  std::ostringstream table;
  table << std::fixed << std::setprecision(2);
  table << std::setw(12) << "compression" << std::setw(10) << "params" << std::setw(18)
        << "pruned_acc" << std::setw(18) << "pruned_f1" << std::setw(18) << "distilled_acc"
        << std::setw(18) << "distilled_f1" << "\n";
  auto cell = [&](const SparsityCurvePoint* p, const SparsityCurvePoint* base, bool f1) {
    if (!p) {
      table << std::setw(18) << "-";
      return;
    }
    const double v = 100.0 * (f1 ? p->slot_f1 : p->intent_acc);
    std::ostringstream c;
    c << std::fixed << std::setprecision(2) << v;
    if (base) {
      const double dv = v - 100.0 * (f1 ? base->slot_f1 : base->intent_acc);
      c << " (" << (dv >= 0 ? "+" : "") << dv << ")";
    }
    table << std::setw(18) << c.str();
  };
  for (int k : grid) {
    std::ostringstream comp;
    comp << std::fixed << std::setprecision(1) << static_cast<double>(k) / 100.0 << "%";
    table << std::setw(12) << comp.str();
    const SparsityCurvePoint* pp = pruned.count(k) ? &pruned.at(k) : nullptr;
    const SparsityCurvePoint* dp = distilled.count(k) ? &distilled.at(k) : nullptr;
    std::ostringstream params;
    if (pp)
      params << pp->params;
    else if (dp)
      params << dp->params;
    else
      params << "-";
    table << std::setw(10) << params.str();
    cell(pp, p0, false);
    cell(pp, p0, true);
    cell(dp, d0, false);
    cell(dp, d0, true);
    table << "\n";
  }
  std::cout << table.str();
  {
    std::ofstream out(out_path(a, "table.txt"), std::ios::trunc);
    out << table.str();
  }
  finish_manifest(man, a, combined_path + ",table.txt");
  return 0;
}

int cmd_flips(const SharedArgs& a, const std::string& before_path, const std::string& after_path,
              const std::string& split) {
  RunManifest man = make_manifest("flips");
  fill_manifest(man, a);
  man.set("before", before_path);
  man.set("after", after_path);
  man.set("split", split);

  JointModel before = load_checkpoint(before_path);
  JointModel after = load_checkpoint(after_path);
  EncodedSplits s = encode_for_model(before, a.data);
  FlipReport rpt = flip_analysis(before, after, pick_split(s, split));

  const std::string records_path = out_path(a, "flips.tsv");
  {
    std::ofstream out(records_path, std::ios::trunc);
    out << "index\ttask\tbefore_correct\tafter_correct\tgold\tbefore_pred\tafter_pred\n";
    for (const FlipRecord& r : rpt.records)
      out << r.index << '\t' << r.task << '\t' << (r.before_correct ? 1 : 0) << '\t'
          << (r.after_correct ? 1 : 0) << '\t' << r.gold << '\t' << r.before_pred << '\t'
          << r.after_pred << '\n';
  }
  std::ostringstream sum;
  sum << "samples " << rpt.samples << "\n"
      << "intent flips correct->incorrect " << rpt.intent_flips_bad << "\n"
      << "intent flips incorrect->correct " << rpt.intent_flips_good << "\n"
      << "slot flips correct->incorrect " << rpt.slot_flips_bad << "\n"
      << "slot flips incorrect->correct " << rpt.slot_flips_good << "\n"
      << "flipped slot tokens " << rpt.flipped_tokens << " (to O: "
      << rpt.flipped_tokens_to_outside << ")\n";
  sum << "flipped tokens by gold tag:\n";
  for (const auto& [tag, n] : rpt.flipped_token_by_gold) sum << "  " << tag << ' ' << n << "\n";
  sum << "flipped tokens by after-model prediction:\n";
  for (const auto& [tag, n] : rpt.flipped_token_by_after) sum << "  " << tag << ' ' << n << "\n";
  std::cout << sum.str();
  {
    std::ofstream out(out_path(a, "summary.txt"), std::ios::trunc);
    out << sum.str();
  }
  finish_manifest(man, a, records_path + ",summary.txt");
  return 0;
}

int cmd_bench(const SharedArgs& a, const std::string& split, int warmup) {
  RunManifest man = make_manifest("bench");
  fill_manifest(man, a);
  man.set("split", split);
  man.set("warmup", warmup);

  JointModel m = load_checkpoint(a.checkpoint);
  EncodedSplits s = encode_for_model(m, a.data);
  LatencyReport r = bench_latency(m, pick_split(s, split), warmup);
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "mean " << r.mean_ms << " ms/sample  stddev " << r.stddev_ms << "  samples "
            << r.samples << "  batch " << r.batch_size << "  warmup " << r.warmup << "\n"
            << "filters " << m.num_filters() << "  params " << count_params(m) << "\n"
            << "hardware: " << r.hardware << "\n";
  const std::string report_path = out_path(a, "latency.tsv");
  {
    std::ofstream out(report_path, std::ios::trunc);
    out << "mean_ms\tstddev_ms\tbatch_size\twarmup\tsamples\tfilters\tparams\thardware\n";
    out << std::fixed << std::setprecision(6) << r.mean_ms << '\t' << r.stddev_ms << '\t'
        << r.batch_size << '\t' << r.warmup << '\t' << r.samples << '\t' << m.num_filters()
        << '\t' << count_params(m) << '\t' << r.hardware << '\n';
  }
  man.set("mean_ms", r.mean_ms);
  finish_manifest(man, a, report_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convolutional joint intent/slot model: training, structured pruning, "
               "distillation and latency benchmarking"};
  app.require_subcommand(1);

  SharedArgs a;
  ModelConfig mc;
  TrainConfig tc;
  int min_count = 1;
  std::string task = "joint", split = "test", mode = "iterative", norm = "l2";
  std::string before_path, after_path, pruned_curve, distilled_curve;
  std::vector<double> compressions;
  double temperature = 2.0, lambda = 0.5;
  PruneSchedule schedule;
  bool include_baseline = false;
  int warmup = 50;

  auto shared = [&](CLI::App* cmd, bool data, bool ckpt, const char* default_out) {
    if (data) cmd->add_option("--data", a.data, "dataset root directory")->required();
    if (ckpt) cmd->add_option("--checkpoint", a.checkpoint, "model checkpoint")->required();
    cmd->add_option("--seed", a.seed, "rng seed")->capture_default_str();
    a.out = default_out;
    cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  };

  CLI::App* t = app.add_subcommand("train", "train a model from scratch");
  shared(t, true, false, "runs/train");
  t->add_option("--vectors", a.vectors, "pre-trained word-vector file")->required();
  t->add_option("--task", task, "intent, slot or joint")->capture_default_str();
  t->add_option("--alpha", mc.alpha, "joint loss weight on the intent term")
      ->capture_default_str();
  t->add_option("--filters", mc.num_filters, "conv filter count")->capture_default_str();
  t->add_option("--kernel", mc.kernel_size, "conv kernel width (odd)")->capture_default_str();
  t->add_option("--dim", mc.embed_dim, "word-vector dimensionality")->capture_default_str();
  t->add_option("--dropout", mc.dropout_p, "dropout probability")->capture_default_str();
  t->add_option("--max-seq-len", mc.max_seq_len, "padded utterance length")
      ->capture_default_str();
  t->add_option("--min-count", min_count, "vocabulary frequency threshold")
      ->capture_default_str();
  add_train_flags(t, tc);

  CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  shared(e, true, true, "runs/eval");
  e->add_option("--split", split, "train, valid or test")->capture_default_str();

  CLI::App* p = app.add_subcommand("prune", "magnitude-prune a trained checkpoint");
  shared(p, true, true, "runs/prune");
  p->add_option("--mode", mode, "iterative or one-shot")->capture_default_str();
  p->add_option("--target", schedule.target_sparsity, "fraction of filters to remove")
      ->required();
  p->add_option("--step", schedule.step_fraction, "fraction of original filters per step")
      ->capture_default_str();
  p->add_option("--norm", norm, "filter ranking norm: l1 or l2")->capture_default_str();
  p->add_flag("--include-baseline", include_baseline,
              "prepend the unpruned model as a 0%-compression curve point");
  add_train_flags(p, schedule.retrain);

  CLI::App* d = app.add_subcommand("distill", "train reduced-width students from a teacher");
  shared(d, true, true, "runs/distill");
  d->add_option("--compression", compressions,
                "target compression rate(s), e.g. --compression 0.5 0.9")
      ->required()
      ->expected(-1);
  d->add_option("--temperature", temperature, "softmax temperature")->capture_default_str();
  d->add_option("--lambda", lambda, "weight on the hard-label term")->capture_default_str();
  add_train_flags(d, tc);

  CLI::App* c = app.add_subcommand("compare", "merge pruning and distillation curves");
  shared(c, false, false, "runs/compare");
  c->add_option("--pruned", pruned_curve, "pruning curve file")->required();
  c->add_option("--distilled", distilled_curve, "distillation curve file")->required();

  CLI::App* f = app.add_subcommand("flips", "prediction-flip analysis between two checkpoints");
  shared(f, true, false, "runs/flips");
  f->add_option("--before", before_path, "baseline checkpoint")->required();
  f->add_option("--after", after_path, "changed checkpoint")->required();
  f->add_option("--split", split, "train, valid or test")->capture_default_str();

  CLI::App* b = app.add_subcommand("bench", "batch-1 latency over a split");
  shared(b, true, true, "runs/bench");
  b->add_option("--split", split, "train, valid or test")->capture_default_str();
  b->add_option("--warmup", warmup, "discarded warm-up passes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*t) {
      mc.task_mode = parse_task_mode(task);
      tc.seed = a.seed;
      return cmd_train(a, mc, tc, min_count);
    }
    if (*e) return cmd_eval(a, split);
    if (*p) {
      schedule.mode = parse_prune_mode(mode);
      schedule.norm = parse_prune_norm(norm);
      schedule.retrain.seed = a.seed;
      return cmd_prune(a, schedule, mode, norm, include_baseline);
    }
    if (*d) return cmd_distill(a, compressions, temperature, lambda, tc);
    if (*c) return cmd_compare(a, pruned_curve, distilled_curve);
    if (*f) return cmd_flips(a, before_path, after_path, split);
    if (*b) return cmd_bench(a, split, warmup);
  } catch (const ConfigError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return 3;
  } catch (const LabelError& err) {
    std::cerr << "label error: " << err.what() << "\n";
    return 3;
  } catch (const DimensionError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return 4;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
