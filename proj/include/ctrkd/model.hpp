#pragma once
// The trainable CTR model: one embedding table per categorical field feeding
// a small ReLU MLP with a single logit output. All math is double precision
// and single-threaded per model; models are plain values.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/prng.hpp"
#include "ctrkd/vocab.hpp"

namespace ctrkd {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before any log.
constexpr double kProbClamp = 1e-7;

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

enum class Activation : uint8_t { Relu = 0, Identity = 1 };

struct EmbeddingTable {
  size_t rows = 0;
  size_t dim = 0;
  std::vector<double> w;  // row-major rows x dim

  std::span<const double> row(size_t r) const { return {w.data() + r * dim, dim}; }
};

struct DenseLayer {
  size_t in = 0;
  size_t out = 0;
  std::vector<double> w;  // row-major in x out
  std::vector<double> b;  // out
  Activation act = Activation::Relu;
};

struct ModelSpec {
  std::vector<FieldSpec> fields;
  std::vector<size_t> hidden = {32, 16};

  size_t input_width() const {
    size_t w = 0;
    for (const auto& f : fields) w += f.embedding_dim;
    return w;
  }
};

struct ModelMeta {
  uint64_t seed = 0;
  uint64_t step = 0;         // optimizer steps applied so far
  uint64_t config_hash = 0;  // hash of the training configuration
  uint64_t parent_hash = 0;  // teacher's config hash when warm-started, else 0
  double label_mean = 0.5;   // mean click rate of the last training window
};

struct CtrModel {
  ModelSpec spec;
  Vocabulary vocab;
  std::vector<EmbeddingTable> tables;  // one per field, same order as spec.fields
  std::vector<DenseLayer> hidden;
  DenseLayer output;  // identity activation, out == 1
  ModelMeta meta;

  size_t input_width() const { return spec.input_width(); }
};

// ---------------------------------------------------------------------------
// Parameter block enumeration. Gradients and optimizer accumulators mirror
// the model's parameters block by block in this canonical order:
// tables (field order), hidden layers (w then b), output layer (w then b).
// ---------------------------------------------------------------------------

struct LayerTensors {
  std::vector<double> w;
  std::vector<double> b;
};

struct ParamSet {
  std::vector<std::vector<double>> tables;
  std::vector<LayerTensors> hidden;
  LayerTensors output;
};

using Gradients = ParamSet;

inline ParamSet zeros_like(const CtrModel& m) {
  ParamSet s;
  s.tables.reserve(m.tables.size());
  for (const auto& t : m.tables) s.tables.emplace_back(t.w.size(), 0.0);
  s.hidden.reserve(m.hidden.size());
  for (const auto& l : m.hidden) {
    s.hidden.push_back(LayerTensors{std::vector<double>(l.w.size(), 0.0),
                                    std::vector<double>(l.b.size(), 0.0)});
  }
  s.output = LayerTensors{std::vector<double>(m.output.w.size(), 0.0),
                          std::vector<double>(m.output.b.size(), 0.0)};
  return s;
}

struct ParamBlockRef {
  std::string label;
  std::vector<double>* data;
};

// Mutable views over every parameter block of the model, canonical order.
inline std::vector<ParamBlockRef> param_blocks(CtrModel& m) {
  std::vector<ParamBlockRef> out;
  for (size_t f = 0; f < m.tables.size(); ++f) {
    out.push_back({"table/" + m.spec.fields[f].name, &m.tables[f].w});
  }
  for (size_t l = 0; l < m.hidden.size(); ++l) {
    out.push_back({"hidden" + std::to_string(l) + "/w", &m.hidden[l].w});
    out.push_back({"hidden" + std::to_string(l) + "/b", &m.hidden[l].b});
  }
  out.push_back({"output/w", &m.output.w});
  out.push_back({"output/b", &m.output.b});
  return out;
}

// Parallel views over a ParamSet, aligned with param_blocks(model).
inline std::vector<std::vector<double>*> set_blocks(const CtrModel& m, ParamSet& s) {
  std::vector<std::vector<double>*> out;
  if (s.tables.size() != m.tables.size() || s.hidden.size() != m.hidden.size()) {
    throw ShapeError("ParamSet does not mirror the model structure");
  }
  for (auto& t : s.tables) out.push_back(&t);
  for (auto& l : s.hidden) {
    out.push_back(&l.w);
    out.push_back(&l.b);
  }
  out.push_back(&s.output.w);
  out.push_back(&s.output.b);
  return out;
}

// ---------------------------------------------------------------------------
// Initialization.
//
// Weights are uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)); biases
// are zero. Every embedding row r of field f draws its own generator seeded
// with mix_seed({seed, kSeedEmbedding, f, r}), so a row's initial values
// depend only on (seed, field, row, dim). Dense layer l is seeded with
// mix_seed({seed, kSeedDense, l}) (the output layer uses l = hidden count).
// Embedding fan is (1, dim); dense fan is (in, out).
// ---------------------------------------------------------------------------

inline void init_embedding_row(std::span<double> row, uint64_t seed, uint64_t field,
                               uint64_t row_index) {
  Xoshiro256pp rng(mix_seed({seed, kSeedEmbedding, field, row_index}));
  const double s = std::sqrt(6.0 / (1.0 + static_cast<double>(row.size())));
  for (auto& v : row) v = rng.uniform(-s, s);
}

inline CtrModel init_model(const ModelSpec& spec, const Vocabulary& vocab, uint64_t seed) {
  if (spec.fields.empty()) throw ConfigError("model spec has no fields");
  if (vocab.field_count() != spec.fields.size()) {
    throw ShapeError("vocabulary fields do not match model spec");
  }
  for (size_t f = 0; f < spec.fields.size(); ++f) {
    if (vocab.field_name(f) != spec.fields[f].name) {
      throw ShapeError("vocabulary field '" + vocab.field_name(f) +
                       "' does not match spec field '" + spec.fields[f].name + "'");
    }
    if (spec.fields[f].embedding_dim == 0) {
      throw ConfigError("embedding_dim must be >= 1 for field " + spec.fields[f].name);
    }
  }

  CtrModel m;
  m.spec = spec;
  m.vocab = vocab;
  m.meta.seed = seed;

  for (size_t f = 0; f < spec.fields.size(); ++f) {
    EmbeddingTable t;
    t.rows = vocab.size(f);
    t.dim = spec.fields[f].embedding_dim;
    t.w.resize(t.rows * t.dim);
    for (size_t r = 0; r < t.rows; ++r) {
      init_embedding_row({t.w.data() + r * t.dim, t.dim}, seed, f, r);
    }
    m.tables.push_back(std::move(t));
  }

  size_t in = spec.input_width();
  for (size_t l = 0; l < spec.hidden.size(); ++l) {
    const size_t out = spec.hidden[l];
    if (out == 0) throw ConfigError("hidden width must be >= 1");
    DenseLayer layer{in, out, {}, {}, Activation::Relu};
    Xoshiro256pp rng(mix_seed({seed, kSeedDense, l}));
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    layer.w.resize(in * out);
    for (auto& v : layer.w) v = rng.uniform(-s, s);
    layer.b.assign(out, 0.0);
    m.hidden.push_back(std::move(layer));
    in = out;
  }
  {
    DenseLayer layer{in, 1, {}, {}, Activation::Identity};
    Xoshiro256pp rng(mix_seed({seed, kSeedDense, spec.hidden.size()}));
    const double s = std::sqrt(6.0 / static_cast<double>(in + 1));
    layer.w.resize(in);
    for (auto& v : layer.w) v = rng.uniform(-s, s);
    layer.b.assign(1, 0.0);
    m.output = std::move(layer);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Encoding impressions to per-field row indices.
// ---------------------------------------------------------------------------

// Row index standing in for "value unknown to this model": the forward pass
// substitutes a zero embedding vector. Never valid in training.
constexpr uint32_t kOovIndex = std::numeric_limits<uint32_t>::max();

enum class OovPolicy { Error, ZeroVector };

// Maps model field order to dataset column positions (matched by name).
struct ColumnMap {
  std::vector<size_t> cols;
};

inline ColumnMap make_column_map(const ModelSpec& spec,
                                 const std::vector<std::string>& dataset_fields) {
  ColumnMap cm;
  for (const auto& f : spec.fields) {
    size_t col = dataset_fields.size();
    for (size_t c = 0; c < dataset_fields.size(); ++c) {
      if (dataset_fields[c] == f.name) {
        col = c;
        break;
      }
    }
    if (col == dataset_fields.size()) {
      throw ShapeError("dataset has no column for model field '" + f.name + "'");
    }
    cm.cols.push_back(col);
  }
  return cm;
}

// Per-field dense indices for one impression. With OovPolicy::Error unknown
// values throw; with ZeroVector they map to the kOovIndex sentinel.
inline std::vector<uint32_t> lookup_indices(const Vocabulary& vocab, const Impression& imp,
                                            const ColumnMap& cm,
                                            OovPolicy policy = OovPolicy::Error) {
  std::vector<uint32_t> idx(cm.cols.size());
  for (size_t f = 0; f < cm.cols.size(); ++f) {
    const std::string& value = imp.features.at(cm.cols[f]);
    if (policy == OovPolicy::Error) {
      idx[f] = static_cast<uint32_t>(vocab.require(f, value));
    } else {
      auto found = vocab.find(f, value);
      idx[f] = found ? static_cast<uint32_t>(*found) : kOovIndex;
    }
  }
  return idx;
}

struct EncodedBatch {
  size_t n_fields = 0;
  std::vector<uint32_t> idx;  // row-major n x n_fields
  std::vector<int64_t> timestamps;
  std::vector<uint8_t> labels;
  std::vector<double> soft_targets;  // NaN when absent

  size_t size() const { return n_fields == 0 ? 0 : idx.size() / n_fields; }
  std::span<const uint32_t> row(size_t i) const { return {idx.data() + i * n_fields, n_fields}; }
};

inline EncodedBatch encode(const Vocabulary& vocab, ImpressionSpan rows, const ColumnMap& cm,
                           OovPolicy policy) {
  EncodedBatch b;
  b.n_fields = cm.cols.size();
  b.idx.reserve(rows.size() * b.n_fields);
  b.timestamps.reserve(rows.size());
  b.labels.reserve(rows.size());
  b.soft_targets.reserve(rows.size());
  for (const auto& r : rows) {
    for (size_t f = 0; f < cm.cols.size(); ++f) {
      const std::string& value = r.features.at(cm.cols[f]);
      auto found = vocab.find(f, value);
      if (found) {
        b.idx.push_back(static_cast<uint32_t>(*found));
      } else if (policy == OovPolicy::ZeroVector) {
        b.idx.push_back(kOovIndex);
      } else {
        throw OovError("out-of-vocabulary value '" + value + "' in field '" +
                       vocab.field_name(f) + "'");
      }
    }
    b.timestamps.push_back(r.timestamp);
    b.labels.push_back(r.click);
    b.soft_targets.push_back(r.soft_target ? *r.soft_target
                                           : std::numeric_limits<double>::quiet_NaN());
  }
  return b;
}

// ---------------------------------------------------------------------------
// Forward / backward.
// ---------------------------------------------------------------------------

// Scratch buffers reused across examples to avoid per-example allocation.
struct Workspace {
  std::vector<std::vector<double>> acts;  // acts[0] = concat input, then per layer
  std::vector<std::vector<double>> deltas;

  void resize_for(const CtrModel& m) {
    acts.assign(m.hidden.size() + 1, {});
    deltas.assign(m.hidden.size() + 1, {});
    acts[0].assign(m.input_width(), 0.0);
    deltas[0].assign(m.input_width(), 0.0);
    for (size_t l = 0; l < m.hidden.size(); ++l) {
      acts[l + 1].assign(m.hidden[l].out, 0.0);
      deltas[l + 1].assign(m.hidden[l].out, 0.0);
    }
  }
};

namespace detail {

inline void gather_input(const CtrModel& m, std::span<const uint32_t> idx,
                         std::vector<double>& x) {
  size_t off = 0;
  for (size_t f = 0; f < m.tables.size(); ++f) {
    const EmbeddingTable& t = m.tables[f];
    const uint32_t r = idx[f];
    if (r == kOovIndex) {
      std::fill(x.begin() + off, x.begin() + off + t.dim, 0.0);
    } else {
      if (r >= t.rows) throw ShapeError("embedding index out of range");
      const double* src = t.w.data() + static_cast<size_t>(r) * t.dim;
      std::copy(src, src + t.dim, x.begin() + off);
    }
    off += t.dim;
  }
}

inline void dense_forward(const DenseLayer& l, const std::vector<double>& x,
                          std::vector<double>& y) {
  for (size_t j = 0; j < l.out; ++j) y[j] = l.b[j];
  for (size_t i = 0; i < l.in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = l.w.data() + i * l.out;
    for (size_t j = 0; j < l.out; ++j) y[j] += xi * wrow[j];
  }
  if (l.act == Activation::Relu) {
    for (auto& v : y) v = v > 0.0 ? v : 0.0;
  }
}

// Forward through hidden layers; returns the output logit. Activations are
// left in ws.acts for the backward pass.
inline double forward_cached(const CtrModel& m, std::span<const uint32_t> idx, Workspace& ws) {
  gather_input(m, idx, ws.acts[0]);
  for (size_t l = 0; l < m.hidden.size(); ++l) {
    dense_forward(m.hidden[l], ws.acts[l], ws.acts[l + 1]);
  }
  const std::vector<double>& h = ws.acts[m.hidden.size()];
  double z = m.output.b[0];
  for (size_t i = 0; i < m.output.in; ++i) z += m.output.w[i] * h[i];
  return z;
}

}  // namespace detail

inline double forward_one(const CtrModel& m, std::span<const uint32_t> idx, Workspace& ws) {
  if (idx.size() != m.tables.size()) throw ShapeError("index row width != field count");
  return detail::forward_cached(m, idx, ws);
}

// Logits for a subset of batch rows, order-preserving.
inline std::vector<double> forward_logits(const CtrModel& m, const EncodedBatch& batch,
                                          std::span<const size_t> rows) {
  Workspace ws;
  ws.resize_for(m);
  std::vector<double> z(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) z[i] = forward_one(m, batch.row(rows[i]), ws);
  return z;
}

inline std::vector<double> forward_logits(const CtrModel& m, const EncodedBatch& batch) {
  std::vector<size_t> all(batch.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return forward_logits(m, batch, all);
}

inline double predict_logit(const CtrModel& m, std::span<const uint32_t> idx) {
  Workspace ws;
  ws.resize_for(m);
  return forward_one(m, idx, ws);
}

// Click probability in [kProbClamp, 1 - kProbClamp].
inline double predict(const CtrModel& m, std::span<const uint32_t> idx) {
  return clamp_prob(logistic(predict_logit(m, idx)));
}

inline double predict(const CtrModel& m, const Impression& imp, const ColumnMap& cm,
                      OovPolicy policy = OovPolicy::Error) {
  return predict(m, lookup_indices(m.vocab, imp, cm, policy));
}

// Accumulates the exact reverse-mode gradient of logit * dz for the example
// whose activations currently sit in `ws` (i.e. forward_cached(m, idx, ws)
// was the last forward). Embedding rows the example does not reference are
// untouched. OOV sentinels are rejected: training data must be fully
// in-vocabulary.
inline void backward_cached(const CtrModel& m, std::span<const uint32_t> idx, double dz,
                            Gradients& grads, Workspace& ws) {
  for (uint32_t r : idx) {
    if (r == kOovIndex) throw OovError("OOV sentinel reached the backward pass");
  }
  const size_t L = m.hidden.size();

  // output layer: z = w . h + b
  const std::vector<double>& last = ws.acts[L];
  std::vector<double>& dlast = ws.deltas[L];
  for (size_t i = 0; i < m.output.in; ++i) {
    grads.output.w[i] += dz * last[i];
    dlast[i] = dz * m.output.w[i];
  }
  grads.output.b[0] += dz;

  // hidden layers, back to front
  for (size_t l = L; l-- > 0;) {
    const DenseLayer& layer = m.hidden[l];
    const std::vector<double>& x = ws.acts[l];
    const std::vector<double>& y = ws.acts[l + 1];
    std::vector<double>& dy = ws.deltas[l + 1];
    std::vector<double>& dx = ws.deltas[l];
    // ReLU: y > 0 iff the pre-activation was > 0
    for (size_t j = 0; j < layer.out; ++j) {
      if (y[j] <= 0.0) dy[j] = 0.0;
    }
    for (size_t j = 0; j < layer.out; ++j) grads.hidden[l].b[j] += dy[j];
    std::fill(dx.begin(), dx.end(), 0.0);
    for (size_t i = 0; i < layer.in; ++i) {
      const double xi = x[i];
      const double* wrow = layer.w.data() + i * layer.out;
      double* grow = grads.hidden[l].w.data() + i * layer.out;
      double acc = 0.0;
      for (size_t j = 0; j < layer.out; ++j) {
        grow[j] += dy[j] * xi;
        acc += wrow[j] * dy[j];
      }
      dx[i] = acc;
    }
  }

  // scatter into embedding rows
  size_t off = 0;
  const std::vector<double>& dx0 = ws.deltas[0];
  for (size_t f = 0; f < m.tables.size(); ++f) {
    const size_t dim = m.tables[f].dim;
    double* grow = grads.tables[f].data() + static_cast<size_t>(idx[f]) * dim;
    for (size_t d = 0; d < dim; ++d) grow[d] += dx0[off + d];
    off += dim;
  }
}

// Batch form: accumulates sum_e logit_e * dl_dz[e] gradients over the
// selected rows.
inline void accumulate_backward(const CtrModel& m, const EncodedBatch& batch,
                                std::span<const size_t> rows, std::span<const double> dl_dz,
                                Gradients& grads, Workspace& ws) {
  if (rows.size() != dl_dz.size()) throw ShapeError("dl_dz length != batch size");
  for (size_t e = 0; e < rows.size(); ++e) {
    std::span<const uint32_t> idx = batch.row(rows[e]);
    detail::forward_cached(m, idx, ws);
    backward_cached(m, idx, dl_dz[e], grads, ws);
  }
}

inline Gradients backward(const CtrModel& m, const EncodedBatch& batch,
                          std::span<const size_t> rows, std::span<const double> dl_dz) {
  Gradients g = zeros_like(m);
  Workspace ws;
  ws.resize_for(m);
  accumulate_backward(m, batch, rows, dl_dz, g, ws);
  return g;
}

}  // namespace ctrkd
