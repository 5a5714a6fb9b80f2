#pragma once
// Synthetic impression stream with known ground truth. Each item carries a
// latent click logit that random-walks once per simulated hour; discrete
// trend events shift an item's or segment's logit for a fixed duration; new
// items arrive as a Poisson process and start with low exposure. Click
// probability for an impression is
//
//   logistic(logit(base_ctr) + item_latent + seg_shift + pub_shift + events)
//
// The whole stream is a pure function of WorldConfig: generation always
// simulates from t = 0 and only emits the requested window, so overlapping
// windows of the same config agree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/prng.hpp"

namespace ctrkd {

inline const std::vector<std::string>& world_field_names() {
  static const std::vector<std::string> names = {"item", "publisher", "user_segment",
                                                 "hour_of_day"};
  return names;
}

struct TrendEvent {
  int64_t time = 0;          // activation time, seconds
  std::string target_field;  // "item" or "user_segment"
  std::string target_value;
  double shift = 0.0;  // added to the affected logit while active
  int64_t duration = 0;

  bool active_at(int64_t ts) const { return ts >= time && ts < time + duration; }
};

struct WorldConfig {
  uint64_t seed = 1;
  size_t n_items_initial = 50;
  size_t n_publishers = 10;
  size_t n_user_segments = 5;
  double base_ctr = 0.05;
  double drift_sigma = 0.02;       // per-hour random-walk std of item logits
  double new_item_rate = 1.0;      // expected arrivals per hour
  size_t impressions_per_hour = 2000;
  double item_logit_sigma = 0.5;   // spread of initial/new item latent logits
  double interaction_sigma = 0.3;  // spread of item x segment / item x publisher shifts
  double popularity_sigma = 1.0;   // exposure logit spread of the initial catalog
  double new_item_popularity_mean = -2.0;  // arrivals start rare
  double new_item_popularity_sigma = 0.5;
  double diurnal_amplitude = 0.0;  // 0 = uniform traffic
  std::vector<TrendEvent> trend_events;

  void validate() const {
    if (n_items_initial < 1) throw ConfigError("n_items_initial must be >= 1");
    if (n_publishers < 1) throw ConfigError("n_publishers must be >= 1");
    if (n_user_segments < 1) throw ConfigError("n_user_segments must be >= 1");
    if (!(base_ctr > 0.0 && base_ctr < 1.0)) throw ConfigError("base_ctr must be in (0, 1)");
    if (impressions_per_hour < 1) throw ConfigError("impressions_per_hour must be >= 1");
    if (!(drift_sigma >= 0.0)) throw ConfigError("drift_sigma must be >= 0");
    if (!(new_item_rate >= 0.0)) throw ConfigError("new_item_rate must be >= 0");
    if (!(diurnal_amplitude >= 0.0 && diurnal_amplitude < 1.0)) {
      throw ConfigError("diurnal_amplitude must be in [0, 1)");
    }
    for (const auto& e : trend_events) {
      if (e.target_field != "item" && e.target_field != "user_segment") {
        throw ConfigError("trend event target must be an item or a user_segment");
      }
      if (e.duration <= 0) throw ConfigError("trend event duration must be > 0");
      if (!std::isfinite(e.shift)) throw ConfigError("trend event shift must be finite");
    }
  }
};

struct ItemState {
  std::string id;
  int64_t birth_time = 0;
  double latent = 0.0;
  double popularity = 0.0;
  std::vector<double> seg_shift;
  std::vector<double> pub_shift;
  std::vector<double> latent_traj;  // latent per hour from birth hour on
};

struct WorldTruth {
  struct ItemTruth {
    int64_t birth_time = 0;
    int64_t first_hour = 0;
    std::vector<double> hourly_ctr;  // exposure-marginal CTR, hourly from first_hour
  };
  std::map<std::string, ItemTruth> items;  // ordered for stable file output

  int64_t birth_time(const std::string& item) const { return require(item).birth_time; }

  // Marginal true CTR of `item` during the hour containing `ts`.
  double ctr_at(const std::string& item, int64_t ts) const {
    const ItemTruth& it = require(item);
    const int64_t hour = ts / 3600;
    const int64_t off = hour - it.first_hour;
    if (off < 0 || static_cast<size_t>(off) >= it.hourly_ctr.size()) {
      throw ConfigError("world truth does not cover hour " + std::to_string(hour) +
                        " for item " + item);
    }
    return it.hourly_ctr[static_cast<size_t>(off)];
  }

 private:
  const ItemTruth& require(const std::string& item) const {
    auto it = items.find(item);
    if (it == items.end()) throw ConfigError("unknown item in world truth: " + item);
    return it->second;
  }
};

struct GenerateResult {
  Dataset data;
  WorldTruth truth;
};

namespace detail {

inline std::string item_name(size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "item_%04zu", i);
  return buf;
}
inline std::string publisher_name(size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "pub_%02zu", i);
  return buf;
}
inline std::string segment_name(size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "seg_%02zu", i);
  return buf;
}
inline std::string hour_name(int64_t ts) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", static_cast<int>((ts / 3600) % 24));
  return buf;
}

inline ItemState make_item(std::string id, int64_t birth, double pop_mean, double pop_sigma,
                           const WorldConfig& cfg, Xoshiro256pp& rng) {
  ItemState it;
  it.id = std::move(id);
  it.birth_time = birth;
  it.latent = rng.normal() * cfg.item_logit_sigma;
  it.popularity = pop_mean + rng.normal() * pop_sigma;
  it.seg_shift.resize(cfg.n_user_segments);
  for (auto& v : it.seg_shift) v = rng.normal() * cfg.interaction_sigma;
  it.pub_shift.resize(cfg.n_publishers);
  for (auto& v : it.pub_shift) v = rng.normal() * cfg.interaction_sigma;
  return it;
}

}  // namespace detail

inline GenerateResult generate_stream(const WorldConfig& cfg, int64_t t0, int64_t t1) {
  cfg.validate();
  if (!(t0 >= 0 && t0 < t1)) throw ConfigError("generate_stream requires 0 <= t0 < t1");
  for (const auto& e : cfg.trend_events) {
    if (e.target_field == "item") {
      bool known = false;
      for (size_t i = 0; i < cfg.n_items_initial && !known; ++i) {
        known = (e.target_value == detail::item_name(i));
      }
      if (!known) {
        throw ConfigError("trend event targets unknown initial item: " + e.target_value);
      }
    } else {
      bool known = false;
      for (size_t s = 0; s < cfg.n_user_segments && !known; ++s) {
        known = (e.target_value == detail::segment_name(s));
      }
      if (!known) throw ConfigError("trend event targets unknown segment: " + e.target_value);
    }
  }

  const double base_logit = std::log(cfg.base_ctr / (1.0 - cfg.base_ctr));
  const int64_t hours = (t1 + 3599) / 3600;

  Xoshiro256pp rng(mix_seed({cfg.seed, kSeedWorld}));
  std::vector<ItemState> items;
  items.reserve(cfg.n_items_initial + static_cast<size_t>(cfg.new_item_rate * hours * 2 + 16));
  for (size_t i = 0; i < cfg.n_items_initial; ++i) {
    items.push_back(detail::make_item(detail::item_name(i), 0, 0.0, cfg.popularity_sigma, cfg,
                                      rng));
  }

  std::vector<std::string> pub_names, seg_names;
  for (size_t p = 0; p < cfg.n_publishers; ++p) pub_names.push_back(detail::publisher_name(p));
  for (size_t s = 0; s < cfg.n_user_segments; ++s) seg_names.push_back(detail::segment_name(s));

  // Active event shift for (item, segment) at time ts.
  auto event_shift = [&](const std::string& item_id, size_t seg, int64_t ts) {
    double shift = 0.0;
    for (const auto& e : cfg.trend_events) {
      if (!e.active_at(ts)) continue;
      if (e.target_field == "item" && e.target_value == item_id) shift += e.shift;
      if (e.target_field == "user_segment" && e.target_value == seg_names[seg]) shift += e.shift;
    }
    return shift;
  };

  GenerateResult out;
  out.data.field_names = world_field_names();
  std::vector<double> cumw;

  for (int64_t h = 0; h < hours; ++h) {
    const int64_t hour_start = h * 3600;

    // hourly random walk (draws are consumed even at sigma 0 so that the
    // stream layout does not depend on the drift setting)
    if (h > 0) {
      for (auto& it : items) it.latent += rng.normal() * cfg.drift_sigma;
    }

    // Poisson arrivals, born at a uniform second within the hour
    const uint64_t arrivals = rng.poisson(cfg.new_item_rate);
    for (uint64_t a = 0; a < arrivals; ++a) {
      const int64_t birth = hour_start + static_cast<int64_t>(rng.below(3600));
      items.push_back(detail::make_item(detail::item_name(items.size()), birth,
                                        cfg.new_item_popularity_mean,
                                        cfg.new_item_popularity_sigma, cfg, rng));
    }

    for (auto& it : items) {
      if (it.birth_time / 3600 <= h) it.latent_traj.push_back(it.latent);
    }

    // exposure weights for everything born before the end of this hour
    cumw.clear();
    double total = 0.0;
    for (const auto& it : items) {
      total += std::exp(it.popularity);
      cumw.push_back(total);
    }

    size_t n_imp = cfg.impressions_per_hour;
    if (cfg.diurnal_amplitude > 0.0) {
      const double phase = 6.283185307179586 * static_cast<double>(h % 24) / 24.0;
      const double scaled = static_cast<double>(cfg.impressions_per_hour) *
                            (1.0 + cfg.diurnal_amplitude * std::sin(phase));
      n_imp = static_cast<size_t>(std::max<long long>(1, std::llround(scaled)));
    }

    for (size_t i = 0; i < n_imp; ++i) {
      const int64_t ts = hour_start + static_cast<int64_t>(i * 3600 / n_imp);

      size_t item_idx = 0;
      for (int attempt = 0;; ++attempt) {
        const double r = rng.uniform01() * total;
        item_idx = static_cast<size_t>(
            std::lower_bound(cumw.begin(), cumw.end(), r) - cumw.begin());
        if (item_idx >= items.size()) item_idx = items.size() - 1;
        if (items[item_idx].birth_time <= ts) break;
        if (attempt >= 64) {
          // pathological popularity mass on an unborn item; fall back to the
          // exposure draw restricted to born items
          double valid_total = 0.0;
          for (const auto& it : items) {
            if (it.birth_time <= ts) valid_total += std::exp(it.popularity);
          }
          double pick = rng.uniform01() * valid_total;
          for (size_t j = 0; j < items.size(); ++j) {
            if (items[j].birth_time > ts) continue;
            pick -= std::exp(items[j].popularity);
            item_idx = j;
            if (pick <= 0.0) break;
          }
          break;
        }
      }
      const ItemState& item = items[item_idx];

      const size_t pub = static_cast<size_t>(rng.below(cfg.n_publishers));
      const size_t seg = static_cast<size_t>(rng.below(cfg.n_user_segments));
      const double p = logistic(base_logit + item.latent + item.seg_shift[seg] +
                                item.pub_shift[pub] + event_shift(item.id, seg, ts));
      const uint8_t click = rng.uniform01() < p ? 1 : 0;

      if (ts >= t0 && ts < t1) {
        Impression imp;
        imp.timestamp = ts;
        imp.features = {item.id, pub_names[pub], seg_names[seg], detail::hour_name(ts)};
        imp.click = click;
        out.data.rows.push_back(std::move(imp));
      }
    }
  }

  // Ground-truth trajectories: per item and hour, the exposure-marginal CTR
  // (uniform over segments and publishers), sampled at the hour start.
  for (const auto& it : items) {
    WorldTruth::ItemTruth truth;
    truth.birth_time = it.birth_time;
    truth.first_hour = it.birth_time / 3600;
    truth.hourly_ctr.reserve(it.latent_traj.size());
    for (size_t k = 0; k < it.latent_traj.size(); ++k) {
      const int64_t hour_ts = (truth.first_hour + static_cast<int64_t>(k)) * 3600;
      double acc = 0.0;
      for (size_t s = 0; s < cfg.n_user_segments; ++s) {
        const double es = event_shift(it.id, s, hour_ts);
        for (size_t p = 0; p < cfg.n_publishers; ++p) {
          acc += logistic(base_logit + it.latent_traj[k] + it.seg_shift[s] + it.pub_shift[p] +
                          es);
        }
      }
      truth.hourly_ctr.push_back(acc / static_cast<double>(cfg.n_user_segments *
                                                           cfg.n_publishers));
    }
    out.truth.items.emplace(it.id, std::move(truth));
  }
  return out;
}

}  // namespace ctrkd
