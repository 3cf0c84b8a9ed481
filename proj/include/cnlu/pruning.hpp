#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "cnlu/train.hpp"

namespace cnlu {

enum class PruneNorm { kL1, kL2 };
enum class PruneMode { kOneShot, kIterative };

inline PruneNorm parse_prune_norm(const std::string& s) {
  if (s == "l1") return PruneNorm::kL1;
  if (s == "l2") return PruneNorm::kL2;
  throw ConfigError("unknown norm '" + s + "' (expected l1 or l2)");
}

inline PruneMode parse_prune_mode(const std::string& s) {
  if (s == "one-shot") return PruneMode::kOneShot;
  if (s == "iterative") return PruneMode::kIterative;
  throw ConfigError("unknown prune mode '" + s + "' (expected one-shot or iterative)");
}

struct PruneSchedule {
  PruneNorm norm = PruneNorm::kL2;
  PruneMode mode = PruneMode::kIterative;
  double step_fraction = 0.1;    // of the ORIGINAL filter count, per iteration
  double target_sparsity = 0.5;  // fraction of filters removed overall
  TrainConfig retrain;

  void validate() const {
    if (target_sparsity < 0.0 || target_sparsity >= 1.0)
      throw ConfigError("target sparsity must lie in [0, 1)");
    if (mode == PruneMode::kIterative &&
        (step_fraction <= 0.0 || step_fraction > target_sparsity))
      throw ConfigError("iterative pruning needs 0 < step_fraction <= target_sparsity");
  }
};

struct SparsityCurvePoint {
  int filters = 0;
  int64_t params = 0;
  double compression_rate = 0.0;  // fraction of original filters removed
  double intent_acc = 0.0;
  double slot_f1 = 0.0;
  std::string checkpoint_path;
};

// Per-filter magnitude over the k*d weights; biases are spliced alongside
// their filter but never ranked.
template <typename T>
Tensor<T> filter_norms(const Tensor<T>& conv_w, PruneNorm norm) {
  if (conv_w.rank() != 3 || conv_w.dim(0) < 1)
    throw DimensionError("conv weights must be [C >= 1, k, d], got " + shape_str(conv_w.shape));
  const int64_t C = conv_w.dim(0), kd = conv_w.dim(1) * conv_w.dim(2);
  Tensor<T> out({C});
  for (int64_t c = 0; c < C; ++c) {
    const T* w = conv_w.ptr() + c * kd;
    double acc = 0.0;
    if (norm == PruneNorm::kL1)
      for (int64_t i = 0; i < kd; ++i) acc += std::abs(static_cast<double>(w[i]));
    else
      for (int64_t i = 0; i < kd; ++i)
        acc += static_cast<double>(w[i]) * static_cast<double>(w[i]);
    out.at(c) = static_cast<T>(norm == PruneNorm::kL1 ? acc : std::sqrt(acc));
  }
  return out;
}

namespace detail {

// Copies the rows of `src` whose index is not in the sorted `remove` set.
template <typename T>
Tensor<T> drop_rows(const Tensor<T>& src, const std::vector<int>& sorted_remove) {
  const int64_t rows = src.dim(0), cols = src.size() / src.dim(0);
  Shape shape = src.shape;
  shape[0] = rows - static_cast<int64_t>(sorted_remove.size());
  Tensor<T> out(shape);
  size_t ri = 0;
  int64_t w = 0;
  for (int64_t r = 0; r < rows; ++r) {
    if (ri < sorted_remove.size() && sorted_remove[ri] == r) {
      ++ri;
      continue;
    }
    std::copy(src.ptr() + r * cols, src.ptr() + (r + 1) * cols, out.ptr() + w * cols);
    ++w;
  }
  return out;
}

}  // namespace detail

// Physically removes the given filters: their conv rows and bias entries, and
// the matching input rows of every head. Everything else is byte-identical.
template <typename T>
JointModelT<T> splice_filters(const JointModelT<T>& m, std::vector<int> remove) {
  const int C = m.num_filters();
  std::sort(remove.begin(), remove.end());
  remove.erase(std::unique(remove.begin(), remove.end()), remove.end());
  if (!remove.empty() && (remove.front() < 0 || remove.back() >= C))
    throw DimensionError("filter index out of range [0, " + std::to_string(C) + ")");
  if (static_cast<int>(remove.size()) >= C)
    throw DimensionError("cannot remove all " + std::to_string(C) + " filters");

  JointModelT<T> out = m;
  if (remove.empty()) return out;
  out.conv_w = detail::drop_rows(m.conv_w, remove);
  out.conv_b = detail::drop_rows(m.conv_b, remove);
  if (m.has_intent_head()) out.intent_w = detail::drop_rows(m.intent_w, remove);
  if (m.has_slot_head()) out.slot_w = detail::drop_rows(m.slot_w, remove);
  out.config.num_filters = out.num_filters();
  return out;
}

// Greedy magnitude step: remove the `count` lowest-norm filters, ties to the
// smaller index.
template <typename T>
JointModelT<T> prune_step(const JointModelT<T>& m, PruneNorm norm, int count) {
  const int C = m.num_filters();
  if (count < 0) throw ConfigError("prune count must be >= 0");
  if (count >= C)
    throw DimensionError("pruning " + std::to_string(count) + " of " + std::to_string(C) +
                         " filters would leave an empty conv layer");
  if (count == 0) return m;
  Tensor<T> norms = filter_norms(m.conv_w, norm);
  std::vector<int> idx(static_cast<size_t>(C));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return norms.at(a) != norms.at(b) ? norms.at(a) < norms.at(b) : a < b;
  });
  idx.resize(static_cast<size_t>(count));
  return splice_filters(m, idx);
}

// Filters kept at a sparsity level: ceil((1 - s) * C0), never below one. The
// epsilon guards against (1 - s) * C0 landing one ulp above an integer.
inline int filters_after_sparsity(int c0, double sparsity) {
  if (sparsity < 0.0 || sparsity >= 1.0) throw ConfigError("sparsity must lie in [0, 1)");
  return std::max<int>(
      1, static_cast<int>(std::ceil((1.0 - sparsity) * static_cast<double>(c0) - 1e-9)));
}

// Filter counts visited by an iterative schedule (excluding the starting
// count): fixed decrements of round(step * C0), clamped to at least one
// filter per step, landing exactly on ceil((1 - target) * C0).
inline std::vector<int> schedule_filter_counts(int c0, double step_fraction,
                                               double target_sparsity) {
  if (c0 < 1) throw ConfigError("schedule needs at least one filter");
  const int target = filters_after_sparsity(c0, target_sparsity);
  const int per_step =
      std::max<int>(1, static_cast<int>(std::llround(step_fraction * static_cast<double>(c0))));
  std::vector<int> counts;
  for (int cur = c0; cur > target;) {
    cur = std::max(target, cur - per_step);
    counts.push_back(cur);
  }
  return counts;
}

template <typename T>
double compression_rate(int original_filters, const JointModelT<T>& m) {
  return 1.0 - static_cast<double>(m.num_filters()) / static_cast<double>(original_filters);
}

// One-shot: a single greedy step to the target count, no retraining.
template <typename T>
JointModelT<T> prune_one_shot(const JointModelT<T>& m, const PruneSchedule& schedule) {
  schedule.validate();
  const int C = m.num_filters();
  return prune_step(m, schedule.norm, C - filters_after_sparsity(C, schedule.target_sparsity));
}

// Hook for persisting each curve point's model; returns the path recorded in
// the curve (empty to skip saving).
using CurveSaver = std::function<std::string(const JointModel&, const SparsityCurvePoint&)>;

// Prune/retrain loop: after each greedy step the model is retrained to
// early-stopping convergence, then evaluated on the test split as-is. A
// diverged retrain records the point with its last-good weights and the loop
// continues.
inline std::vector<SparsityCurvePoint> prune_iterative(
    const JointModel& model, const std::vector<EncodedExample>& train_set,
    const std::vector<EncodedExample>& dev_set, const std::vector<EncodedExample>& test_set,
    const PruneSchedule& schedule, const CurveSaver& saver = nullptr,
    std::ostream* log = nullptr) {
  schedule.validate();
  if (schedule.mode != PruneMode::kIterative)
    throw ConfigError("prune_iterative requires an iterative schedule");
  const int c0 = model.num_filters();
  const std::vector<int> counts =
      schedule_filter_counts(c0, schedule.step_fraction, schedule.target_sparsity);

  std::vector<SparsityCurvePoint> curve;
  JointModel cur = model;
  for (int want : counts) {
    cur = prune_step(cur, schedule.norm, cur.num_filters() - want);
    if (log)
      *log << "pruned to " << cur.num_filters() << "/" << c0 << " filters, retraining\n";
    TrainResult r = train(std::move(cur), train_set, dev_set, schedule.retrain, log);
    if (r.diverged && log) *log << "retrain diverged; keeping last-good weights\n";
    cur = std::move(r.model);

    EvalResult ev = evaluate(cur, test_set);
    SparsityCurvePoint pt;
    pt.filters = cur.num_filters();
    pt.params = count_params(cur);
    pt.compression_rate = compression_rate(c0, cur);
    pt.intent_acc = ev.intent_accuracy;
    pt.slot_f1 = ev.slot.f1;
    if (saver) pt.checkpoint_path = saver(cur, pt);
    if (log)
      *log << "filters " << pt.filters << " params " << pt.params << " acc " << pt.intent_acc
           << " f1 " << pt.slot_f1 << "\n";
    curve.push_back(std::move(pt));
  }
  return curve;
}

// Curve record file: tab-separated, one header line then one line per point.
inline void write_curve(const std::vector<SparsityCurvePoint>& curve, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open curve file for writing: " + path);
  out << "filters\tparams\tcompression_rate\tintent_acc\tslot_f1\tcheckpoint_path\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& p : curve)
    out << p.filters << '\t' << p.params << '\t' << p.compression_rate << '\t' << p.intent_acc
        << '\t' << p.slot_f1 << '\t' << p.checkpoint_path << '\n';
  if (!out) throw DataError("failed writing curve file: " + path);
}

inline std::vector<SparsityCurvePoint> read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open curve file: " + path);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("filters\t"))
    throw DataError("curve file missing header: " + path);
  std::vector<SparsityCurvePoint> curve;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    SparsityCurvePoint p;
    std::string rest;
    if (!(ss >> p.filters >> p.params >> p.compression_rate >> p.intent_acc >> p.slot_f1))
      throw DataError("malformed curve record at " + path + ":" + std::to_string(lineno));
    std::getline(ss, rest);
    const size_t at = rest.find_first_not_of(" \t");
    if (at != std::string::npos) p.checkpoint_path = rest.substr(at);
    curve.push_back(std::move(p));
  }
  return curve;
}

}  // namespace cnlu
