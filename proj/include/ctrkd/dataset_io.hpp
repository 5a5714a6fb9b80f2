#pragma once
// Tab-separated on-disk formats with a checksum trailer.
//
// Impression file:
//   ctrkd.dataset\tv1\tfields=<comma-separated field names>
//   <ts>\t<value per field>\t<click>[\t<soft target, %.9f>]   one line per row
//   #checksum\tfnv1a64:<16 hex digits>
//
// Truth sidecar (per item and hour):
//   ctrkd.truth\tv1
//   <item>\t<birth seconds>\t<hour index>\t<true ctr, %.9f>
//   #checksum\tfnv1a64:<16 hex digits>
//
// The checksum covers every byte before the trailer line, newlines included.
// Timestamps must be non-decreasing; readers reject anything else.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkd/datagen.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/hash.hpp"
#include "ctrkd/impression.hpp"

namespace ctrkd {

namespace detail {

inline std::string checksum_trailer(uint64_t h) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "#checksum\tfnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline void split_tabs(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <typename Int>
inline Int parse_int(std::string_view s, const std::string& where) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataFormatError(where + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

inline double parse_double(std::string_view s, const std::string& where) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || tmp.empty()) {
    throw DataFormatError(where + ": bad number '" + tmp + "'");
  }
  return v;
}

// Reads one line per call, folding consumed bytes into `hash`. Returns false
// at end of file.
class HashedLineReader {
 public:
  explicit HashedLineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    pending_ = line;  // hashed lazily so the trailer stays out of the digest
    return true;
  }

  void fold_pending() {
    hash_.update(pending_.data(), pending_.size());
    hash_.update("\n", 1);
  }

  uint64_t digest() const { return hash_.digest(); }
  size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  Fnv1a64 hash_;
  std::string pending_;
  size_t line_no_ = 0;
};

inline std::string loc(const std::string& path, size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

}  // namespace detail

inline void write_dataset(const std::string& path, const Dataset& data) {
  if (data.field_names.empty()) throw ConfigError("dataset has no fields");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open for writing: " + path);

  Fnv1a64 hash;
  auto emit = [&](const std::string& line) {
    hash.update(line.data(), line.size());
    hash.update("\n", 1);
    out << line << '\n';
  };

  std::string header = "ctrkd.dataset\tv1\tfields=";
  for (size_t i = 0; i < data.field_names.size(); ++i) {
    if (i) header += ',';
    header += data.field_names[i];
  }
  emit(header);

  std::string line;
  char num[40];
  for (const auto& row : data.rows) {
    if (row.features.size() != data.field_names.size()) {
      throw ShapeError("row has " + std::to_string(row.features.size()) + " features, expected " +
                       std::to_string(data.field_names.size()));
    }
    line.clear();
    std::snprintf(num, sizeof(num), "%lld", static_cast<long long>(row.timestamp));
    line += num;
    for (const auto& v : row.features) {
      line += '\t';
      line += v;
    }
    line += '\t';
    line += (row.click ? '1' : '0');
    if (row.soft_target) {
      std::snprintf(num, sizeof(num), "%.9f", *row.soft_target);
      line += '\t';
      line += num;
    }
    emit(line);
  }
  out << detail::checksum_trailer(hash.digest()) << '\n';
  if (!out) throw DataFormatError("write failed: " + path);
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open: " + path);
  detail::HashedLineReader reader(in);

  std::string line;
  if (!reader.next(line)) throw DataFormatError(path + ": empty file");
  std::vector<std::string_view> parts;
  detail::split_tabs(line, parts);
  if (parts.size() != 3 || parts[0] != "ctrkd.dataset" || parts[1] != "v1" ||
      parts[2].substr(0, 7) != "fields=") {
    throw DataFormatError(detail::loc(path, 1) + ": bad header");
  }
  reader.fold_pending();

  Dataset data;
  {
    std::string_view list = parts[2].substr(7);
    size_t start = 0;
    while (true) {
      const size_t comma = list.find(',', start);
      const auto name = list.substr(start, comma == std::string_view::npos ? comma
                                                                           : comma - start);
      if (name.empty()) throw DataFormatError(detail::loc(path, 1) + ": empty field name");
      data.field_names.emplace_back(name);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  const size_t n_fields = data.field_names.size();

  bool saw_trailer = false;
  int64_t prev_ts = INT64_MIN;
  while (reader.next(line)) {
    if (line.rfind("#checksum\t", 0) == 0) {
      detail::split_tabs(line, parts);
      if (parts.size() != 2 || parts[1].substr(0, 8) != "fnv1a64:") {
        throw DataFormatError(detail::loc(path, reader.line_no()) + ": bad checksum trailer");
      }
      const std::string_view hex = parts[1].substr(8);
      uint64_t expected = 0;
      const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), expected, 16);
      if (ec != std::errc() || ptr != hex.data() + hex.size()) {
        throw DataFormatError(detail::loc(path, reader.line_no()) + ": bad checksum trailer");
      }
      if (expected != reader.digest()) {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(reader.digest()));
        throw DataFormatError(detail::loc(path, reader.line_no()) +
                              ": checksum mismatch, file says " + std::string(hex) +
                              " but contents hash to " + buf);
      }
      saw_trailer = true;
      break;
    }

    const std::string where = detail::loc(path, reader.line_no());
    detail::split_tabs(line, parts);
    if (parts.size() != n_fields + 2 && parts.size() != n_fields + 3) {
      throw DataFormatError(where + ": expected " + std::to_string(n_fields + 2) + " or " +
                            std::to_string(n_fields + 3) + " columns, got " +
                            std::to_string(parts.size()));
    }
    Impression row;
    row.timestamp = detail::parse_int<int64_t>(parts[0], where);
    if (row.timestamp < prev_ts) {
      throw DataFormatError(where + ": timestamps must be non-decreasing");
    }
    prev_ts = row.timestamp;
    row.features.reserve(n_fields);
    for (size_t f = 0; f < n_fields; ++f) {
      if (parts[1 + f].empty()) throw DataFormatError(where + ": empty feature value");
      row.features.emplace_back(parts[1 + f]);
    }
    const std::string_view click = parts[1 + n_fields];
    if (click == "0") {
      row.click = 0;
    } else if (click == "1") {
      row.click = 1;
    } else {
      throw DataFormatError(where + ": click must be 0 or 1, got '" + std::string(click) + "'");
    }
    if (parts.size() == n_fields + 3) {
      const double soft = detail::parse_double(parts[2 + n_fields], where);
      if (!(soft >= 0.0 && soft <= 1.0)) {
        throw DataFormatError(where + ": soft target out of [0, 1]");
      }
      row.soft_target = soft;
    }
    data.rows.push_back(std::move(row));
    reader.fold_pending();
  }
  if (!saw_trailer) throw DataFormatError(path + ": missing checksum trailer");
  return data;
}

inline void write_truth(const std::string& path, const WorldTruth& truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  Fnv1a64 hash;
  auto emit = [&](const std::string& line) {
    hash.update(line.data(), line.size());
    hash.update("\n", 1);
    out << line << '\n';
  };
  emit("ctrkd.truth\tv1");
  char buf[64];
  for (const auto& [item, it] : truth.items) {
    for (size_t k = 0; k < it.hourly_ctr.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "\t%lld\t%lld\t%.9f",
                    static_cast<long long>(it.birth_time),
                    static_cast<long long>(it.first_hour + static_cast<int64_t>(k)),
                    it.hourly_ctr[k]);
      emit(item + buf);
    }
  }
  out << detail::checksum_trailer(hash.digest()) << '\n';
  if (!out) throw DataFormatError("write failed: " + path);
}

inline WorldTruth read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open: " + path);
  detail::HashedLineReader reader(in);

  std::string line;
  if (!reader.next(line)) throw DataFormatError(path + ": empty file");
  if (line != "ctrkd.truth\tv1") throw DataFormatError(detail::loc(path, 1) + ": bad header");
  reader.fold_pending();

  WorldTruth truth;
  std::vector<std::string_view> parts;
  bool saw_trailer = false;
  while (reader.next(line)) {
    if (line.rfind("#checksum\t", 0) == 0) {
      detail::split_tabs(line, parts);
      const std::string_view hex =
          (parts.size() == 2 && parts[1].substr(0, 8) == "fnv1a64:") ? parts[1].substr(8)
                                                                     : std::string_view{};
      uint64_t expected = 0;
      const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), expected, 16);
      if (hex.empty() || ec != std::errc() || ptr != hex.data() + hex.size()) {
        throw DataFormatError(detail::loc(path, reader.line_no()) + ": bad checksum trailer");
      }
      if (expected != reader.digest()) {
        throw DataFormatError(detail::loc(path, reader.line_no()) + ": checksum mismatch");
      }
      saw_trailer = true;
      break;
    }
    const std::string where = detail::loc(path, reader.line_no());
    detail::split_tabs(line, parts);
    if (parts.size() != 4) throw DataFormatError(where + ": expected 4 columns");
    const std::string item(parts[0]);
    const int64_t birth = detail::parse_int<int64_t>(parts[1], where);
    const int64_t hour = detail::parse_int<int64_t>(parts[2], where);
    const double ctr = detail::parse_double(parts[3], where);
    auto& it = truth.items[item];
    if (it.hourly_ctr.empty()) {
      it.birth_time = birth;
      it.first_hour = hour;
    } else {
      if (it.birth_time != birth) throw DataFormatError(where + ": inconsistent birth time");
      if (hour != it.first_hour + static_cast<int64_t>(it.hourly_ctr.size())) {
        throw DataFormatError(where + ": hours must be contiguous per item");
      }
    }
    it.hourly_ctr.push_back(ctr);
    reader.fold_pending();
  }
  if (!saw_trailer) throw DataFormatError(path + ": missing checksum trailer");
  return truth;
}

}  // namespace ctrkd
