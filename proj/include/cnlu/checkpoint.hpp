#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cnlu/model.hpp"

namespace cnlu {

// Binary model file, version 1. Layout (all integers little-endian u32):
//   "CNLU" | version | d C k V I S task_mode | alpha (f32)
//   7 tensors in fixed order (embeddings, conv_w, conv_b, intent_w, intent_b,
//   slot_w, slot_b), each as ndims, dims..., then row-major f32 payload;
//   absent heads are written with ndims = 0 and no payload.
//   Then three string tables (intents, slots, vocabulary): count, then per
//   string byte_len + UTF-8 bytes.
// Floats round-trip bit-exactly: they are moved as their IEEE-754 bit
// patterns, never reformatted.
inline constexpr char kCheckpointMagic[4] = {'C', 'N', 'L', 'U'};
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

struct ByteWriter {
  std::vector<unsigned char> buf;

  void u32(uint32_t v) {
    buf.push_back(static_cast<unsigned char>(v & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    buf.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void tensor(const Tensor<float>& t) {
    u32(static_cast<uint32_t>(t.rank()));  // 0 marks an absent head
    for (int64_t d : t.shape) u32(static_cast<uint32_t>(d));
    buf.reserve(buf.size() + t.data.size() * 4);
    for (float v : t.data) f32(v);
  }
  void string_table(const std::vector<std::string>& table) {
    u32(static_cast<uint32_t>(table.size()));
    for (const auto& s : table) str(s);
  }
};

struct ByteReader {
  const unsigned char* p;
  size_t n;
  size_t pos = 0;
  std::string path;

  void need(size_t k) const {
    if (pos + k > n)
      throw DataError("truncated checkpoint '" + path + "' at byte " + std::to_string(pos));
  }
  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(p[pos]) | (static_cast<uint32_t>(p[pos + 1]) << 8) |
                 (static_cast<uint32_t>(p[pos + 2]) << 16) |
                 (static_cast<uint32_t>(p[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str() {
    const uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(p + pos), len);
    pos += len;
    return s;
  }
  Tensor<float> tensor() {
    const uint32_t ndims = u32();
    if (ndims == 0) return {};
    if (ndims > 4) throw DataError("checkpoint tensor rank " + std::to_string(ndims));
    Shape shape;
    int64_t total = 1;
    for (uint32_t i = 0; i < ndims; ++i) {
      const uint32_t d = u32();
      if (d == 0) throw DataError("checkpoint tensor has a zero dimension");
      shape.push_back(static_cast<int64_t>(d));
      total *= static_cast<int64_t>(d);
    }
    Tensor<float> t(shape);
    need(static_cast<size_t>(total) * 4);
    for (int64_t i = 0; i < total; ++i) t.data[static_cast<size_t>(i)] = f32();
    return t;
  }
  std::vector<std::string> string_table() {
    const uint32_t count = u32();
    std::vector<std::string> out;
    out.reserve(count);
    for (uint32_t i = 0; i < count; ++i) out.push_back(str());
    return out;
  }
};

}  // namespace detail

inline void save_checkpoint(const JointModel& m, const std::string& path) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<uint32_t>(m.config.embed_dim));
  w.u32(static_cast<uint32_t>(m.num_filters()));
  w.u32(static_cast<uint32_t>(m.config.kernel_size));
  w.u32(static_cast<uint32_t>(m.vocab.size()));
  w.u32(static_cast<uint32_t>(m.labels.num_intents()));
  w.u32(static_cast<uint32_t>(m.labels.num_slots()));
  w.u32(static_cast<uint32_t>(m.config.task_mode));
  w.f32(m.config.alpha);
  w.tensor(m.embeddings);
  w.tensor(m.conv_w);
  w.tensor(m.conv_b);
  w.tensor(m.intent_w);
  w.tensor(m.intent_b);
  w.tensor(m.slot_w);
  w.tensor(m.slot_b);
  w.string_table(m.labels.intents);
  w.string_table(m.labels.slots);
  w.string_table(m.vocab.id_to_token);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.buf.data()),
            static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

inline JointModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  detail::ByteReader r{raw.data(), raw.size(), 0, path};

  r.need(4);
  if (!std::equal(kCheckpointMagic, kCheckpointMagic + 4, r.p))
    throw DataError("not a model checkpoint (bad magic): " + path);
  r.pos = 4;
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " in " + path);

  const auto d = static_cast<int>(r.u32());
  const auto C = static_cast<int>(r.u32());
  const auto k = static_cast<int>(r.u32());
  const auto V = static_cast<int>(r.u32());
  const auto I = static_cast<int>(r.u32());
  const auto S = static_cast<int>(r.u32());
  const uint32_t mode_raw = r.u32();
  if (mode_raw > 2) throw DataError("checkpoint task_mode out of range: " + std::to_string(mode_raw));
  const float alpha = r.f32();

  JointModel m;
  m.config.embed_dim = d;
  m.config.num_filters = C;
  m.config.kernel_size = k;
  m.config.task_mode = static_cast<TaskMode>(mode_raw);
  m.config.alpha = alpha;
  m.config.validate();

  m.embeddings = r.tensor();
  m.conv_w = r.tensor();
  m.conv_b = r.tensor();
  m.intent_w = r.tensor();
  m.intent_b = r.tensor();
  m.slot_w = r.tensor();
  m.slot_b = r.tensor();

  auto expect = [&](const Tensor<float>& t, Shape want, const char* name) {
    if (t.shape != want)
      throw DataError(std::string("checkpoint tensor '") + name + "' has shape " +
                      shape_str(t.shape) + ", expected " + shape_str(want));
  };
  expect(m.embeddings, {V, d}, "embeddings");
  expect(m.conv_w, {C, k, d}, "conv_w");
  expect(m.conv_b, {C}, "conv_b");
  const bool want_intent = m.config.task_mode != TaskMode::kSlot;
  const bool want_slot = m.config.task_mode != TaskMode::kIntent;
  if (want_intent) {
    expect(m.intent_w, {C, I}, "intent_w");
    expect(m.intent_b, {I}, "intent_b");
  } else if (!m.intent_w.empty() || !m.intent_b.empty()) {
    throw DataError("slot-only checkpoint carries an intent head: " + path);
  }
  if (want_slot) {
    expect(m.slot_w, {C, S}, "slot_w");
    expect(m.slot_b, {S}, "slot_b");
  } else if (!m.slot_w.empty() || !m.slot_b.empty()) {
    throw DataError("intent-only checkpoint carries a slot head: " + path);
  }

  const auto intents = r.string_table();
  const auto slots = r.string_table();
  const auto vocab = r.string_table();
  if (r.pos != r.n)
    throw DataError("trailing bytes after checkpoint payload: " + path);
  if (static_cast<int>(intents.size()) != I || static_cast<int>(slots.size()) != S)
    throw DataError("checkpoint label tables disagree with header counts: " + path);
  if (static_cast<int>(vocab.size()) != V)
    throw DataError("checkpoint vocabulary disagrees with header count: " + path);
  if (V < 2 || vocab[0] != Vocabulary::kPadToken || vocab[1] != Vocabulary::kUnkToken)
    throw DataError("checkpoint vocabulary missing PAD/UNK sentinels: " + path);

  for (const auto& s : intents) m.labels.add_intent(s);
  for (const auto& s : slots) m.labels.add_slot(s);
  if (m.labels.num_intents() != I || m.labels.num_slots() != S)
    throw DataError("duplicate labels in checkpoint tables: " + path);
  for (size_t i = 2; i < vocab.size(); ++i) m.vocab.add(vocab[i]);
  if (m.vocab.size() != V) throw DataError("duplicate tokens in checkpoint vocabulary: " + path);

  return m;
}

}  // namespace cnlu
