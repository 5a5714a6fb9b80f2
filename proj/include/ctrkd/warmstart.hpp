#pragma once
// Student construction from a teacher: copy every dense parameter and every
// shared embedding row bit for bit, grow the vocabulary with values observed
// in fresh data, and initialize only the new rows from scratch.

#include <cstdint>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"

namespace ctrkd {

// Superset of `base`: indices of pre-existing values are unchanged, new
// values are appended in first-appearance order over the stream (fields
// scanned in vocabulary order within an impression).
inline Vocabulary expand_vocabulary(const Vocabulary& base, ImpressionSpan fresh,
                                    const std::vector<std::string>& dataset_fields) {
  Vocabulary out = base;
  std::vector<size_t> cols(out.field_count());
  for (size_t f = 0; f < out.field_count(); ++f) {
    size_t col = dataset_fields.size();
    for (size_t c = 0; c < dataset_fields.size(); ++c) {
      if (dataset_fields[c] == out.field_name(f)) {
        col = c;
        break;
      }
    }
    if (col == dataset_fields.size()) {
      throw ShapeError("dataset has no column for field '" + out.field_name(f) + "'");
    }
    cols[f] = col;
  }
  for (const auto& imp : fresh) {
    for (size_t f = 0; f < cols.size(); ++f) out.insert(f, imp.features.at(cols[f]));
  }
  return out;
}

inline Vocabulary vocab_from(const std::vector<std::string>& field_names, ImpressionSpan rows,
                             const std::vector<std::string>& dataset_fields) {
  return expand_vocabulary(Vocabulary(field_names), rows, dataset_fields);
}

// Builds the student. Dense layers and shared embedding rows are bit-equal to
// the teacher; rows for new vocabulary entries are drawn from the standard
// init distribution and depend only on (seed, field, row index).
inline CtrModel warm_start(const CtrModel& teacher, const Vocabulary& expanded, uint64_t seed) {
  if (!expanded.is_superset_of(teacher.vocab)) {
    throw ShapeError("expanded vocabulary is not a superset of the teacher's");
  }
  CtrModel s;
  s.spec = teacher.spec;
  s.vocab = expanded;
  s.hidden = teacher.hidden;
  s.output = teacher.output;
  s.meta.seed = seed;
  s.meta.step = 0;
  s.meta.parent_hash = teacher.meta.config_hash;
  s.meta.label_mean = teacher.meta.label_mean;

  for (size_t f = 0; f < teacher.tables.size(); ++f) {
    const EmbeddingTable& tt = teacher.tables[f];
    EmbeddingTable st;
    st.rows = expanded.size(f);
    st.dim = tt.dim;
    st.w.resize(st.rows * st.dim);
    std::copy(tt.w.begin(), tt.w.end(), st.w.begin());
    for (size_t r = tt.rows; r < st.rows; ++r) {
      init_embedding_row({st.w.data() + r * st.dim, st.dim}, seed, f, r);
    }
    s.tables.push_back(std::move(st));
  }
  return s;
}

// Optimizer state for a warm-started student. By default accumulators start
// at zero; with carry=true the teacher's accumulators are copied for shared
// parameters (new rows still start at zero).
inline OptimizerState warm_start_state(const CtrModel& student, const CtrModel& teacher,
                                       const OptimizerState* teacher_state, bool carry) {
  OptimizerState s = make_optimizer_state(student);
  if (!carry || teacher_state == nullptr) return s;
  s.epsilon = teacher_state->epsilon;
  for (size_t f = 0; f < teacher.tables.size(); ++f) {
    const auto& src = teacher_state->acc.tables[f];
    std::copy(src.begin(), src.end(), s.acc.tables[f].begin());
  }
  for (size_t l = 0; l < teacher.hidden.size(); ++l) {
    s.acc.hidden[l] = teacher_state->acc.hidden[l];
  }
  s.acc.output = teacher_state->acc.output;
  return s;
}

// Fresh initialization over an expanded vocabulary; no teacher influence.
inline CtrModel scratch_start(const ModelSpec& spec, const Vocabulary& vocab, uint64_t seed) {
  return init_model(spec, vocab, seed);
}

}  // namespace ctrkd
