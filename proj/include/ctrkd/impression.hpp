#pragma once
// One labeled impression and the in-memory dataset container. Feature values
// are positional: row.features[i] belongs to dataset.field_names[i].

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"

namespace ctrkd {

struct Impression {
  int64_t timestamp = 0;  // simulated epoch seconds
  std::vector<std::string> features;
  uint8_t click = 0;
  std::optional<double> soft_target;

  bool operator==(const Impression& o) const {
    return timestamp == o.timestamp && features == o.features && click == o.click &&
           soft_target == o.soft_target;
  }
};

struct Dataset {
  std::vector<std::string> field_names;
  std::vector<Impression> rows;
};

using ImpressionSpan = std::span<const Impression>;

// Half-open window [t_start, t_end). Rows must be sorted by timestamp; the
// result aliases the input. Adjacent windows partition a range exactly.
inline ImpressionSpan slice_window(ImpressionSpan rows, int64_t t_start, int64_t t_end) {
  if (t_start >= t_end) throw ConfigError("slice_window: t_start must be < t_end");
  auto lo = std::lower_bound(rows.begin(), rows.end(), t_start,
                             [](const Impression& r, int64_t t) { return r.timestamp < t; });
  auto hi = std::lower_bound(lo, rows.end(), t_end,
                             [](const Impression& r, int64_t t) { return r.timestamp < t; });
  return rows.subspan(static_cast<size_t>(lo - rows.begin()), static_cast<size_t>(hi - lo));
}

inline ImpressionSpan slice_window(const Dataset& ds, int64_t t_start, int64_t t_end) {
  return slice_window(ImpressionSpan(ds.rows), t_start, t_end);
}

inline double mean_click_rate(ImpressionSpan rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.click;
  return s / static_cast<double>(rows.size());
}

}  // namespace ctrkd
