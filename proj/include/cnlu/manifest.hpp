#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "cnlu/util.hpp"

namespace cnlu {

inline constexpr const char* kToolkitVersion = "1.0.0";

// Ordered key/value record describing one CLI run: command, every resolved
// flag, seed, dataset checksums, timestamps, and produced artifact paths.
// Serialized as two tab-separated lines (header naming the fields, then the
// values) so runs can be diffed and replayed.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> fields;

  void set(const std::string& key, std::string value) {
    for (char& c : value)
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    for (auto& [k, v] : fields)
      if (k == key) {
        v = std::move(value);
        return;
      }
    fields.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  template <typename T>
    requires std::integral<T>
  void set(const std::string& key, T value) {
    set(key, std::to_string(value));
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open manifest for writing: " + path);
    for (size_t i = 0; i < fields.size(); ++i) out << (i ? "\t" : "") << fields[i].first;
    out << '\n';
    for (size_t i = 0; i < fields.size(); ++i) out << (i ? "\t" : "") << fields[i].second;
    out << '\n';
    if (!out) throw DataError("failed writing manifest: " + path);
  }

 private:
  static std::string format_double(double v) {
    std::string s = std::to_string(v);  // fixed 6-digit form, stable across runs
    return s;
  }
};

inline RunManifest make_manifest(const std::string& command) {
  RunManifest m;
  m.set("command", command);
  m.set("toolkit_version", kToolkitVersion);
  m.set("started_at", now_iso8601());
  return m;
}

// Combined content hash of the nine split files under a dataset root.
inline std::string dataset_fingerprint(const std::string& root) {
  static constexpr const char* kSplits[] = {"train", "valid", "test"};
  static constexpr const char* kFiles[] = {"seq.in", "seq.out", "label"};
  uint64_t h = 1469598103934665603ull;  // FNV offset basis
  auto mix = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const char* split : kSplits) {
    std::string dir = root + "/" + split;
    if (std::string(split) == "valid" && !file_exists(dir + "/seq.in")) dir = root + "/dev";
    for (const char* file : kFiles) mix(fnv1a64_file(dir + "/" + file));
  }
  return to_hex(h);
}

}  // namespace cnlu
