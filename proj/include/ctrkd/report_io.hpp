#pragma once
// Report plumbing: line-delimited JSON records for per-cycle metrics and
// plain text for the tab-separated tables. JSON objects keep insertion order
// so identical runs serialize to identical bytes.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctrkd/error.hpp"

namespace ctrkd {

using ojson = nlohmann::ordered_json;

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataFormatError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_jsonl(const std::string& path, const std::vector<ojson>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

inline std::vector<ojson> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open: " + path);
  std::vector<ojson> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ojson rec = ojson::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw DataFormatError(path + ":" + std::to_string(line_no) + ": bad json record");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string hex_u64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline uint64_t parse_hex_u64(const std::string& s) {
  if (s.size() != 16) throw DataFormatError("expected 16 hex digits, got '" + s + "'");
  uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') {
      d = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      d = c - 'a' + 10;
    } else {
      throw DataFormatError("expected 16 hex digits, got '" + s + "'");
    }
    v = (v << 4) | static_cast<uint64_t>(d);
  }
  return v;
}

}  // namespace ctrkd
