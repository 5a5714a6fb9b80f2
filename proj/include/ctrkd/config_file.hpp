#pragma once
// INI-style run configuration. Sections [world], [schedule], [train], [kd]
// and [regimes]; '#' or ';' start a comment line; keys are snake_case and
// unknown keys are errors (config typos must not pass silently). Durations
// are given in hours ("_hours" suffix) or days and converted to simulated
// seconds. The repeatable `event` key injects trend events:
//
//   event = <time_hours> <item|user_segment> <value> <logit_shift> <duration_hours>
//
// Example:
//   [world]
//   seed = 7
//   impressions_per_hour = 500
//   event = 360 item item_0003 2.5 48
//
//   [regimes]
//   active = ws_only, ws_kd

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctrkd/datagen.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/pipeline.hpp"

namespace ctrkd {

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

struct ConfigCursor {
  std::string where;  // "<file>:<line>"

  double num(const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
      throw ConfigError(where + ": bad number '" + v + "'");
    }
    return x;
  }

  uint64_t uint(const std::string& v) const {
    const double x = num(v);
    if (x < 0 || x != std::floor(x)) throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<uint64_t>(x);
  }

  int64_t hours(const std::string& v) const {
    return static_cast<int64_t>(std::llround(num(v) * 3600.0));
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + v + "'");
  }
};

}  // namespace detail

inline PipelineConfig parse_config_text(const std::string& text, const std::string& name) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  size_t line_no = 0;
  bool regimes_set = false;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const detail::ConfigCursor cur{name + ":" + std::to_string(line_no)};

    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(cur.where + ": unterminated section header");
      section = t.substr(1, t.size() - 2);
      if (section != "world" && section != "schedule" && section != "train" &&
          section != "kd" && section != "regimes") {
        throw ConfigError(cur.where + ": unknown section [" + section + "]");
      }
      continue;
    }

    const size_t eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(cur.where + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (section.empty()) throw ConfigError(cur.where + ": key outside any section");
    if (value.empty()) throw ConfigError(cur.where + ": empty value for '" + key + "'");

    if (section == "world") {
      WorldConfig& w = cfg.world;
      if (key == "seed") {
        w.seed = cur.uint(value);
      } else if (key == "n_items_initial") {
        w.n_items_initial = cur.uint(value);
      } else if (key == "n_publishers") {
        w.n_publishers = cur.uint(value);
      } else if (key == "n_user_segments") {
        w.n_user_segments = cur.uint(value);
      } else if (key == "base_ctr") {
        w.base_ctr = cur.num(value);
      } else if (key == "drift_sigma") {
        w.drift_sigma = cur.num(value);
      } else if (key == "new_item_rate") {
        w.new_item_rate = cur.num(value);
      } else if (key == "impressions_per_hour") {
        w.impressions_per_hour = cur.uint(value);
      } else if (key == "item_logit_sigma") {
        w.item_logit_sigma = cur.num(value);
      } else if (key == "interaction_sigma") {
        w.interaction_sigma = cur.num(value);
      } else if (key == "popularity_sigma") {
        w.popularity_sigma = cur.num(value);
      } else if (key == "new_item_popularity_mean") {
        w.new_item_popularity_mean = cur.num(value);
      } else if (key == "new_item_popularity_sigma") {
        w.new_item_popularity_sigma = cur.num(value);
      } else if (key == "diurnal_amplitude") {
        w.diurnal_amplitude = cur.num(value);
      } else if (key == "event") {
        std::istringstream es(value);
        std::string field, target;
        double time_h = 0, shift = 0, dur_h = 0;
        if (!(es >> time_h >> field >> target >> shift >> dur_h) || !(es >> std::ws).eof()) {
          throw ConfigError(cur.where +
                            ": event needs <time_h> <field> <value> <shift> <duration_h>");
        }
        TrendEvent e;
        e.time = static_cast<int64_t>(std::llround(time_h * 3600.0));
        e.target_field = field;
        e.target_value = target;
        e.shift = shift;
        e.duration = static_cast<int64_t>(std::llround(dur_h * 3600.0));
        w.trend_events.push_back(e);
      } else {
        throw ConfigError(cur.where + ": unknown key '" + key + "' in [world]");
      }
    } else if (section == "schedule") {
      Schedule& s = cfg.schedule;
      if (key == "teacher_period_hours") {
        s.teacher_period = cur.hours(value);
      } else if (key == "teacher_window_hours") {
        s.teacher_window = cur.hours(value);
      } else if (key == "student_period_hours") {
        s.student_period = cur.hours(value);
      } else if (key == "student_window_hours") {
        s.student_window = cur.hours(value);
      } else {
        throw ConfigError(cur.where + ": unknown key '" + key + "' in [schedule]");
      }
    } else if (section == "train") {
      if (key == "horizon_days") {
        cfg.horizon_days = cur.uint(value);
      } else if (key == "learning_rate") {
        cfg.learning_rate = cur.num(value);
      } else if (key == "batch_size") {
        cfg.batch_size = cur.uint(value);
      } else if (key == "teacher_epochs") {
        cfg.teacher_epochs = cur.uint(value);
      } else if (key == "student_epochs") {
        cfg.student_epochs = cur.uint(value);
      } else if (key == "seed") {
        cfg.train_seed = cur.uint(value);
      } else if (key == "carry_optimizer_state") {
        cfg.carry_optimizer_state = cur.boolean(value);
      } else if (key == "embedding_dims") {
        cfg.embedding_dims.clear();
        for (const auto& part : detail::split_list(value, ',')) {
          cfg.embedding_dims.push_back(cur.uint(part));
        }
      } else if (key == "hidden") {
        cfg.hidden.clear();
        for (const auto& part : detail::split_list(value, ',')) {
          cfg.hidden.push_back(cur.uint(part));
        }
      } else {
        throw ConfigError(cur.where + ": unknown key '" + key + "' in [train]");
      }
    } else if (section == "kd") {
      if (key == "alpha") {
        cfg.kd.alpha = cur.num(value);
      } else if (key == "temperature") {
        cfg.kd.temperature = cur.num(value);
      } else if (key == "scale_distill_by_t2") {
        cfg.kd.scale_distill_by_t2 = cur.boolean(value);
      } else {
        throw ConfigError(cur.where + ": unknown key '" + key + "' in [kd]");
      }
    } else {  // regimes
      if (key == "active") {
        cfg.regimes.clear();
        for (const auto& part : detail::split_list(value, ',')) {
          cfg.regimes.push_back(parse_regime(part));
        }
        regimes_set = true;
      } else {
        throw ConfigError(cur.where + ": unknown key '" + key + "' in [regimes]");
      }
    }
  }
  (void)regimes_set;
  return cfg;
}

inline PipelineConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace ctrkd
