#pragma once

#include <chrono>
#include <cmath>
#include <fstream>

#include "cnlu/infer.hpp"

namespace cnlu {

struct LatencyReport {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  int batch_size = 1;  // fixed: single-utterance latency
  int warmup = 0;
  int64_t samples = 0;
  std::string hardware;
};

inline std::string cpu_model_name() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const size_t colon = line.find(':');
      if (colon != std::string::npos) {
        size_t at = line.find_first_not_of(" \t", colon + 1);
        if (at != std::string::npos) return line.substr(at);
      }
    }
  }
  return "unknown cpu";
}

// Single-threaded batch-1 latency over the full test set: `warmup` discarded
// passes, then one timed forward per sample. The clock wraps the forward call
// only. The engine's workspace must not move or grow across the run.
template <typename T>
LatencyReport bench_latency(const JointModelT<T>& m, const std::vector<EncodedExample>& test,
                            int warmup = 50) {
  if (test.empty()) throw DataError("benchmark needs a non-empty test set");
  if (warmup < 0) throw ConfigError("warmup must be >= 0");
  using clock = std::chrono::steady_clock;

  InferenceEngine<T> engine(m);
  const uint64_t fp0 = engine.workspace_fingerprint();
  double sink = 0.0;
  for (int i = 0; i < warmup; ++i) {
    auto out = engine.forward(test[static_cast<size_t>(i) % test.size()]);
    sink += out.intent_logits ? static_cast<double>(out.intent_logits[0])
                              : static_cast<double>(out.slot_logits[0]);
  }

  std::vector<double> ms(test.size());
  for (size_t i = 0; i < test.size(); ++i) {
    const auto t0 = clock::now();
    auto out = engine.forward(test[i]);
    const auto t1 = clock::now();
    sink += out.intent_logits ? static_cast<double>(out.intent_logits[0])
                              : static_cast<double>(out.slot_logits[0]);
    ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  if (engine.workspace_fingerprint() != fp0)
    throw NumericError("inference workspace moved during the benchmark run");
  // Keep the forward results observable so the loop cannot be elided.
  volatile double keep = sink;
  (void)keep;

  LatencyReport r;
  r.warmup = warmup;
  r.samples = static_cast<int64_t>(test.size());
  r.hardware = cpu_model_name();
  double sum = 0.0;
  for (double v : ms) sum += v;
  r.mean_ms = sum / static_cast<double>(ms.size());
  double var = 0.0;
  for (double v : ms) var += (v - r.mean_ms) * (v - r.mean_ms);
  r.stddev_ms = std::sqrt(var / static_cast<double>(ms.size()));
  return r;
}

}  // namespace cnlu
