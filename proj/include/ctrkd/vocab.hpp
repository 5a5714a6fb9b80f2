#pragma once
// Field schema and per-field vocabularies. Indices within a field are dense,
// append-only: the first value ever inserted gets index 0, and an index never
// changes once assigned.

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctrkd/error.hpp"

namespace ctrkd {

struct FieldSpec {
  std::string name;
  size_t embedding_dim = 1;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& field_names) {
    for (const auto& n : field_names) add_field(n);
  }

  size_t add_field(const std::string& name) {
    if (field_ids_.count(name)) throw ConfigError("duplicate vocabulary field: " + name);
    field_ids_.emplace(name, fields_.size());
    fields_.push_back(Field{name, {}, {}});
    return fields_.size() - 1;
  }

  size_t field_count() const { return fields_.size(); }
  const std::string& field_name(size_t f) const { return fields_.at(f).name; }

  std::optional<size_t> field_id(std::string_view name) const {
    auto it = field_ids_.find(std::string(name));
    if (it == field_ids_.end()) return std::nullopt;
    return it->second;
  }

  // Returns the existing index or appends the value at the next dense index.
  size_t insert(size_t field, const std::string& value) {
    Field& fd = fields_.at(field);
    auto it = fd.index.find(value);
    if (it != fd.index.end()) return it->second;
    const size_t idx = fd.values.size();
    fd.index.emplace(value, idx);
    fd.values.push_back(value);
    return idx;
  }

  std::optional<size_t> find(size_t field, const std::string& value) const {
    const Field& fd = fields_.at(field);
    auto it = fd.index.find(value);
    if (it == fd.index.end()) return std::nullopt;
    return it->second;
  }

  size_t require(size_t field, const std::string& value) const {
    auto idx = find(field, value);
    if (!idx) {
      throw OovError("out-of-vocabulary value '" + value + "' in field '" +
                     fields_.at(field).name + "'");
    }
    return *idx;
  }

  size_t size(size_t field) const { return fields_.at(field).values.size(); }

  // Values in index order (index i holds the value mapped to i).
  const std::vector<std::string>& values(size_t field) const { return fields_.at(field).values; }

  // True when `this` has the same fields in the same order and every value of
  // `base` at the same index. This is the superset relation warm starts need.
  bool is_superset_of(const Vocabulary& base) const {
    if (fields_.size() != base.fields_.size()) return false;
    for (size_t f = 0; f < fields_.size(); ++f) {
      if (fields_[f].name != base.fields_[f].name) return false;
      const auto& mine = fields_[f].values;
      const auto& theirs = base.fields_[f].values;
      if (mine.size() < theirs.size()) return false;
      for (size_t i = 0; i < theirs.size(); ++i) {
        if (mine[i] != theirs[i]) return false;
      }
    }
    return true;
  }

  bool operator==(const Vocabulary& o) const {
    if (fields_.size() != o.fields_.size()) return false;
    for (size_t f = 0; f < fields_.size(); ++f) {
      if (fields_[f].name != o.fields_[f].name) return false;
      if (fields_[f].values != o.fields_[f].values) return false;
    }
    return true;
  }

 private:
  struct Field {
    std::string name;
    std::vector<std::string> values;
    std::unordered_map<std::string, size_t> index;
  };
  std::vector<Field> fields_;
  std::unordered_map<std::string, size_t> field_ids_;
};

}  // namespace ctrkd
