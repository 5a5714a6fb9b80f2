#pragma once
// Versioned binary checkpoint. Byte layout (all integers little-endian,
// doubles as IEEE-754 bits, strings as u32 length + bytes):
//
//   magic            8 bytes "CTRKDCK1"
//   format_version   u32
//   meta             seed u64, step u64, config_hash u64, parent_hash u64,
//                    label_mean f64
//   n_fields         u32
//   per field        name str, embedding_dim u32
//   per field vocab  n_values u64, then value strings in index order
//   per field table  rows u64, dim u64, rows*dim f64 row-major
//   n_hidden         u32
//   per layer        in u64, out u64, activation u8, in*out f64, out f64 bias
//   output layer     same record
//   has_opt          u8; if 1: epsilon f64 then accumulator blocks in the
//                    same shapes/order as the parameter blocks above
//   checksum         u64 FNV-1a of every prior byte
//
// The writer is canonical: saving a loaded checkpoint reproduces the file
// byte for byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"
#include "ctrkd/hash.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"

namespace ctrkd {

constexpr char kCheckpointMagic[9] = "CTRKDCK1";
constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    buf_.append(s);
  }
  void bytes(const void* p, size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void f64_block(const std::vector<double>& v) {
    for (double d : v) f64(d);
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(const char* data, size_t n) : p_(data), end_(data + n) {}

  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(*p_++);
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(*p_++)) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(*p_++)) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(p_, n);
    p_ += n;
    return s;
  }
  void f64_block(std::vector<double>& v, size_t n) {
    v.resize(n);
    for (size_t i = 0; i < n; ++i) v[i] = f64();
  }
  size_t remaining() const { return static_cast<size_t>(end_ - p_); }

 private:
  void need(size_t n) {
    if (static_cast<size_t>(end_ - p_) < n) {
      throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint file truncated");
    }
  }
  const char* p_;
  const char* end_;
};

inline void write_layer(ByteWriter& w, const DenseLayer& l) {
  w.u64(l.in);
  w.u64(l.out);
  w.u8(static_cast<uint8_t>(l.act));
  w.f64_block(l.w);
  w.f64_block(l.b);
}

inline DenseLayer read_layer(ByteReader& r) {
  DenseLayer l;
  l.in = r.u64();
  l.out = r.u64();
  const uint8_t act = r.u8();
  if (act > 1) throw CheckpointError(CheckpointError::Kind::Corrupt, "unknown activation code");
  l.act = static_cast<Activation>(act);
  r.f64_block(l.w, l.in * l.out);
  r.f64_block(l.b, l.out);
  return l;
}

}  // namespace detail

inline std::string serialize_checkpoint(const CtrModel& m, const OptimizerState* opt) {
  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.u64(m.meta.seed);
  w.u64(m.meta.step);
  w.u64(m.meta.config_hash);
  w.u64(m.meta.parent_hash);
  w.f64(m.meta.label_mean);

  w.u32(static_cast<uint32_t>(m.spec.fields.size()));
  for (const auto& f : m.spec.fields) {
    w.str(f.name);
    w.u32(static_cast<uint32_t>(f.embedding_dim));
  }
  for (size_t f = 0; f < m.spec.fields.size(); ++f) {
    const auto& values = m.vocab.values(f);
    w.u64(values.size());
    for (const auto& v : values) w.str(v);
  }
  for (const auto& t : m.tables) {
    w.u64(t.rows);
    w.u64(t.dim);
    w.f64_block(t.w);
  }
  w.u32(static_cast<uint32_t>(m.hidden.size()));
  for (const auto& l : m.hidden) detail::write_layer(w, l);
  detail::write_layer(w, m.output);

  w.u8(opt ? 1 : 0);
  if (opt) {
    w.f64(opt->epsilon);
    for (const auto& t : opt->acc.tables) w.f64_block(t);
    for (const auto& l : opt->acc.hidden) {
      w.f64_block(l.w);
      w.f64_block(l.b);
    }
    w.f64_block(opt->acc.output.w);
    w.f64_block(opt->acc.output.b);
  }

  detail::ByteWriter out;
  out.bytes(w.data().data(), w.data().size());
  out.u64(fnv1a64(w.data().data(), w.data().size()));
  return out.data();
}

struct LoadedCheckpoint {
  CtrModel model;
  std::optional<OptimizerState> opt;
};

inline LoadedCheckpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 8 + 4 + 8) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint file truncated");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw CheckpointError(CheckpointError::Kind::BadMagic, "not a checkpoint file (bad magic)");
  }
  const size_t body = bytes.size() - 8;
  detail::ByteReader tail(bytes.data() + body, 8);
  if (tail.u64() != fnv1a64(bytes.data(), body)) {
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint checksum mismatch");
  }

  detail::ByteReader r(bytes.data() + 8, body - 8);
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::Version,
                          "unsupported checkpoint format_version " + std::to_string(version));
  }

  LoadedCheckpoint out;
  CtrModel& m = out.model;
  m.meta.seed = r.u64();
  m.meta.step = r.u64();
  m.meta.config_hash = r.u64();
  m.meta.parent_hash = r.u64();
  m.meta.label_mean = r.f64();

  const uint32_t n_fields = r.u32();
  for (uint32_t f = 0; f < n_fields; ++f) {
    FieldSpec fs;
    fs.name = r.str();
    fs.embedding_dim = r.u32();
    m.spec.fields.push_back(fs);
    m.vocab.add_field(fs.name);
  }
  for (uint32_t f = 0; f < n_fields; ++f) {
    const uint64_t n_values = r.u64();
    for (uint64_t i = 0; i < n_values; ++i) m.vocab.insert(f, r.str());
  }
  for (uint32_t f = 0; f < n_fields; ++f) {
    EmbeddingTable t;
    t.rows = r.u64();
    t.dim = r.u64();
    if (t.rows != m.vocab.size(f) || t.dim != m.spec.fields[f].embedding_dim) {
      throw CheckpointError(CheckpointError::Kind::Corrupt, "table shape/vocabulary mismatch");
    }
    r.f64_block(t.w, t.rows * t.dim);
    m.tables.push_back(std::move(t));
  }
  const uint32_t n_hidden = r.u32();
  m.spec.hidden.clear();
  for (uint32_t l = 0; l < n_hidden; ++l) {
    m.hidden.push_back(detail::read_layer(r));
    m.spec.hidden.push_back(m.hidden.back().out);
  }
  m.output = detail::read_layer(r);

  const uint8_t has_opt = r.u8();
  if (has_opt == 1) {
    OptimizerState s;
    s.epsilon = r.f64();
    s.acc = zeros_like(m);
    for (auto& t : s.acc.tables) r.f64_block(t, t.size());
    for (auto& l : s.acc.hidden) {
      r.f64_block(l.w, l.w.size());
      r.f64_block(l.b, l.b.size());
    }
    r.f64_block(s.acc.output.w, s.acc.output.w.size());
    r.f64_block(s.acc.output.b, s.acc.output.b.size());
    out.opt = std::move(s);
  } else if (has_opt != 0) {
    throw CheckpointError(CheckpointError::Kind::Corrupt, "bad optimizer-state flag");
  }
  if (r.remaining() != 0) {
    throw CheckpointError(CheckpointError::Kind::Corrupt, "trailing bytes in checkpoint");
  }
  return out;
}

inline void save_checkpoint(const CtrModel& m, const OptimizerState* opt,
                            const std::string& path) {
  const std::string bytes = serialize_checkpoint(m, opt);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError(CheckpointError::Kind::Io, "cannot open for write: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError(CheckpointError::Kind::Io, "write failed: " + path);
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(CheckpointError::Kind::Io, "cannot open for read: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

// Digest of parameters + vocabulary only (no metadata). Two models with equal
// digests have bit-identical weights.
inline uint64_t parameter_digest(const CtrModel& m) {
  detail::ByteWriter w;
  for (size_t f = 0; f < m.spec.fields.size(); ++f) {
    w.str(m.spec.fields[f].name);
    for (const auto& v : m.vocab.values(f)) w.str(v);
    w.f64_block(m.tables[f].w);
  }
  for (const auto& l : m.hidden) {
    w.f64_block(l.w);
    w.f64_block(l.b);
  }
  w.f64_block(m.output.w);
  w.f64_block(m.output.b);
  return fnv1a64(w.data().data(), w.data().size());
}

}  // namespace ctrkd
