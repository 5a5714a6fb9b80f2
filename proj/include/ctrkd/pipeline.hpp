#pragma once
// Deployment orchestration on a simulated clock. Each teacher period (a
// "day") starts by training a teacher from scratch on the trailing history
// window; every student period within it each requested regime trains and
// deploys a student:
//
//   baseline  scratch init, history window, plain CE
//   kd_only   scratch init, history window, distillation objective
//   ws_only   warm start from the day's teacher, fresh window, plain CE
//   ws_kd     warm start from the day's teacher, fresh window, distillation
//
// Soft targets come from the current day's teacher and are precomputed
// before a student's optimization loop. Every deployed model is scored on
// the student period immediately following its deployment (traffic it has
// never seen). Per-tick model seeds are shared across regimes so that
// configurations which are mathematically identical (alpha = 0) produce
// bit-identical parameter trajectories.
//
// Artifacts written per run: registry.tsv, metrics.jsonl, summary.tsv,
// checkpoints/*.ckpt (all byte-deterministic) and cost.tsv (wall-clock
// measurements live only here).

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctrkd/checkpoint.hpp"
#include "ctrkd/datagen.hpp"
#include "ctrkd/distill.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/hash.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/metrics.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"
#include "ctrkd/prng.hpp"
#include "ctrkd/report_io.hpp"
#include "ctrkd/trainer.hpp"
#include "ctrkd/warmstart.hpp"

namespace ctrkd {

enum class Regime { Baseline, KdOnly, WsOnly, WsKd };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Baseline: return "baseline";
    case Regime::KdOnly: return "kd_only";
    case Regime::WsOnly: return "ws_only";
    case Regime::WsKd: return "ws_kd";
  }
  throw ConfigError("invalid regime value");
}

inline Regime parse_regime(const std::string& s) {
  if (s == "baseline") return Regime::Baseline;
  if (s == "kd_only") return Regime::KdOnly;
  if (s == "ws_only") return Regime::WsOnly;
  if (s == "ws_kd") return Regime::WsKd;
  throw ConfigError("unknown regime '" + s + "'");
}

inline bool regime_uses_ws(Regime r) { return r == Regime::WsOnly || r == Regime::WsKd; }
inline bool regime_uses_kd(Regime r) { return r == Regime::KdOnly || r == Regime::WsKd; }

struct Schedule {
  int64_t teacher_period = 24 * 3600;
  int64_t teacher_window = 14 * 24 * 3600;
  int64_t student_period = 4 * 3600;
  int64_t student_window = 4 * 3600;

  void validate() const {
    if (teacher_period <= 0 || teacher_window <= 0 || student_period <= 0 ||
        student_window <= 0) {
      throw ConfigError("schedule durations must be positive");
    }
    if (student_period > teacher_period) {
      throw ConfigError("student_period must not exceed teacher_period");
    }
    if (teacher_period % student_period != 0) {
      throw ConfigError("teacher_period must be divisible by student_period");
    }
  }

  int64_t students_per_day() const { return teacher_period / student_period; }
};

struct Deployment {
  int64_t deploy_time = 0;
  std::string model_id;
  std::string regime;  // "teacher" or a student regime name
  int64_t window_start = 0;
  int64_t window_end = 0;
  std::string parent_id = "-";  // teacher the model was derived from, "-" if none
};

struct DeploymentRegistry {
  std::vector<Deployment> deployments;

  // Strictly increasing deploy times within each regime lane, and every
  // parent reference resolves to an earlier deployment.
  void validate() const {
    std::map<std::string, int64_t> last_time;
    std::set<std::string> seen_ids;
    for (const auto& d : deployments) {
      if (d.model_id.empty() || d.regime.empty()) {
        throw ConfigError("registry entry missing model id or regime");
      }
      if (!seen_ids.insert(d.model_id).second) {
        throw ConfigError("duplicate model id in registry: " + d.model_id);
      }
      auto it = last_time.find(d.regime);
      if (it != last_time.end() && d.deploy_time <= it->second) {
        throw ConfigError("deploy times not strictly increasing for regime " + d.regime);
      }
      last_time[d.regime] = d.deploy_time;
      if (d.parent_id != "-" && !seen_ids.contains(d.parent_id)) {
        throw ConfigError("unresolved parent '" + d.parent_id + "' for " + d.model_id);
      }
    }
  }

  // Most recent deployment of `regime` at or before t; nullptr before the
  // first one.
  const Deployment* active_at(const std::string& regime, int64_t t) const {
    const Deployment* best = nullptr;
    for (const auto& d : deployments) {
      if (d.regime == regime && d.deploy_time <= t) best = &d;
    }
    return best;
  }

  std::string to_tsv() const {
    std::string out = "deploy_time\tmodel_id\tregime\twindow_start\twindow_end\tparent_id\n";
    char buf[64];
    for (const auto& d : deployments) {
      std::snprintf(buf, sizeof(buf), "%lld\t", static_cast<long long>(d.deploy_time));
      out += buf;
      out += d.model_id;
      out += '\t';
      out += d.regime;
      std::snprintf(buf, sizeof(buf), "\t%lld\t%lld\t", static_cast<long long>(d.window_start),
                    static_cast<long long>(d.window_end));
      out += buf;
      out += d.parent_id;
      out += '\n';
    }
    return out;
  }
};

struct PipelineConfig {
  WorldConfig world;
  Schedule schedule;
  size_t horizon_days = 1;  // teacher periods simulated after warmup
  std::vector<Regime> regimes = {Regime::Baseline, Regime::KdOnly, Regime::WsOnly,
                                 Regime::WsKd};
  std::vector<size_t> embedding_dims = {16, 8, 4, 4};  // per world field
  std::vector<size_t> hidden = {32, 16};
  double learning_rate = 0.05;
  size_t batch_size = 256;
  size_t teacher_epochs = 1;
  size_t student_epochs = 2;
  KdConfig kd;
  uint64_t train_seed = 1;
  bool carry_optimizer_state = false;

  void validate() const {
    world.validate();
    schedule.validate();
    kd.validate();
    if (horizon_days < 1) {
      throw ConfigError("horizon too short: need at least one teacher period after warmup");
    }
    if (regimes.empty()) throw ConfigError("no regimes requested");
    std::set<std::string> names;
    for (Regime r : regimes) {
      if (!names.insert(regime_name(r)).second) {
        throw ConfigError(std::string("duplicate regime: ") + regime_name(r));
      }
    }
    if (embedding_dims.size() != world_field_names().size()) {
      throw ConfigError("embedding_dims must list one dimension per field");
    }
    for (size_t d : embedding_dims) {
      if (d < 1) throw ConfigError("embedding dimensions must be >= 1");
    }
    for (size_t h : hidden) {
      if (h < 1) throw ConfigError("hidden widths must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (teacher_epochs < 1 || student_epochs < 1) throw ConfigError("epochs must be >= 1");
  }
};

inline ModelSpec model_spec_for(const PipelineConfig& cfg) {
  ModelSpec spec;
  const auto& names = world_field_names();
  for (size_t i = 0; i < names.size(); ++i) {
    spec.fields.push_back(FieldSpec{names[i], cfg.embedding_dims[i]});
  }
  spec.hidden = cfg.hidden;
  return spec;
}

// Hash of everything that shapes the run except the seeds. Stored in every
// checkpoint and report; regime comparisons refuse to pair runs whose hashes
// differ.
inline uint64_t pipeline_config_hash(const PipelineConfig& cfg) {
  std::string s;
  char buf[64];
  auto add_u = [&](uint64_t v) {
    std::snprintf(buf, sizeof(buf), "%llu;", static_cast<unsigned long long>(v));
    s += buf;
  };
  auto add_i = [&](int64_t v) {
    std::snprintf(buf, sizeof(buf), "%lld;", static_cast<long long>(v));
    s += buf;
  };
  auto add_f = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g;", v);
    s += buf;
  };
  s += "world;";
  add_u(cfg.world.n_items_initial);
  add_u(cfg.world.n_publishers);
  add_u(cfg.world.n_user_segments);
  add_f(cfg.world.base_ctr);
  add_f(cfg.world.drift_sigma);
  add_f(cfg.world.new_item_rate);
  add_u(cfg.world.impressions_per_hour);
  add_f(cfg.world.item_logit_sigma);
  add_f(cfg.world.interaction_sigma);
  add_f(cfg.world.popularity_sigma);
  add_f(cfg.world.new_item_popularity_mean);
  add_f(cfg.world.new_item_popularity_sigma);
  add_f(cfg.world.diurnal_amplitude);
  for (const auto& e : cfg.world.trend_events) {
    s += "event;" + e.target_field + ";" + e.target_value + ";";
    add_i(e.time);
    add_f(e.shift);
    add_i(e.duration);
  }
  s += "schedule;";
  add_i(cfg.schedule.teacher_period);
  add_i(cfg.schedule.teacher_window);
  add_i(cfg.schedule.student_period);
  add_i(cfg.schedule.student_window);
  s += "train;";
  add_u(cfg.horizon_days);
  for (size_t d : cfg.embedding_dims) add_u(d);
  s += "hidden;";
  for (size_t h : cfg.hidden) add_u(h);
  add_f(cfg.learning_rate);
  add_u(cfg.batch_size);
  add_u(cfg.teacher_epochs);
  add_u(cfg.student_epochs);
  s += "kd;";
  add_f(cfg.kd.alpha);
  add_f(cfg.kd.temperature);
  add_u(cfg.kd.scale_distill_by_t2 ? 1 : 0);
  add_u(cfg.carry_optimizer_state ? 1 : 0);
  return fnv1a64(s);
}

struct CycleRecord {
  std::string model_id;
  std::string regime;
  std::string parent_id = "-";
  bool is_teacher = false;
  uint64_t model_seed = 0;
  int64_t deploy_time = 0;
  int64_t window_start = 0;
  int64_t window_end = 0;
  int64_t eval_start = 0;
  int64_t eval_end = 0;
  MetricsReport metrics;
  AgeBucketReport buckets;
  TrainResult train;
};

struct PipelineResult {
  uint64_t config_hash = 0;
  DeploymentRegistry registry;
  std::vector<CycleRecord> records;
};

struct CostReport {
  size_t n_teachers = 0;
  size_t n_students = 0;
  double teacher_wall_mean = 0.0;
  double student_wall_mean = 0.0;
  double teacher_samples_mean = 0.0;  // per-training samples consumed
  double student_samples_mean = 0.0;
  double wall_ratio = 0.0;    // teacher mean / student mean
  double sample_ratio = 0.0;
};

inline CostReport measure_training_cost(const PipelineResult& run) {
  CostReport rep;
  double tw = 0.0, sw = 0.0, ts = 0.0, ss = 0.0;
  for (const auto& rec : run.records) {
    if (rec.is_teacher) {
      ++rep.n_teachers;
      tw += rec.train.wall_seconds;
      ts += static_cast<double>(rec.train.samples_consumed);
    } else {
      ++rep.n_students;
      sw += rec.train.wall_seconds;
      ss += static_cast<double>(rec.train.samples_consumed);
    }
  }
  if (rep.n_teachers) {
    rep.teacher_wall_mean = tw / static_cast<double>(rep.n_teachers);
    rep.teacher_samples_mean = ts / static_cast<double>(rep.n_teachers);
  }
  if (rep.n_students) {
    rep.student_wall_mean = sw / static_cast<double>(rep.n_students);
    rep.student_samples_mean = ss / static_cast<double>(rep.n_students);
  }
  if (rep.student_wall_mean > 0.0) rep.wall_ratio = rep.teacher_wall_mean / rep.student_wall_mean;
  if (rep.student_samples_mean > 0.0) {
    rep.sample_ratio = rep.teacher_samples_mean / rep.student_samples_mean;
  }
  return rep;
}

namespace detail {

inline std::string model_number(const char* prefix, int64_t n, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%03lld%s", prefix, static_cast<long long>(n), suffix);
  return buf;
}

inline ojson bucket_json(const BucketMetrics& b) {
  ojson j;
  j["n"] = b.n;
  j["log_loss"] = b.log_loss;
  j["mean_pred"] = b.mean_pred;
  j["mean_label"] = b.mean_label;
  j["mean_abs_err"] = b.mean_abs_err;
  return j;
}

inline ojson cycle_json(const CycleRecord& rec, const PipelineConfig& cfg, uint64_t chash) {
  ojson j;
  j["model_id"] = rec.model_id;
  j["regime"] = rec.regime;
  j["parent_id"] = rec.parent_id;
  j["deploy_time"] = rec.deploy_time;
  j["window_start"] = rec.window_start;
  j["window_end"] = rec.window_end;
  j["eval_start"] = rec.eval_start;
  j["eval_end"] = rec.eval_end;
  j["world_seed"] = cfg.world.seed;
  j["train_seed"] = cfg.train_seed;
  j["model_seed"] = rec.model_seed;
  j["config_hash"] = hex_u64(chash);
  j["n"] = rec.metrics.n;
  j["log_loss"] = rec.metrics.log_loss;
  if (rec.metrics.auc) {
    j["auc"] = *rec.metrics.auc;
  } else {
    j["auc"] = nullptr;
  }
  j["calibration_error"] = rec.metrics.calibration_error;
  j["mean_pred"] = rec.metrics.mean_pred;
  j["mean_label"] = rec.metrics.mean_label;
  j["new_bucket"] = bucket_json(rec.buckets.fresh);
  j["old_bucket"] = bucket_json(rec.buckets.stale);
  ojson t;
  t["examples"] = rec.train.access.examples;
  t["samples_consumed"] = rec.train.samples_consumed;
  t["access_min_ts"] = rec.train.access.min_timestamp;
  t["access_max_ts"] = rec.train.access.max_timestamp;
  t["epoch_mean_loss"] = rec.train.epoch_mean_loss;
  j["train"] = t;
  return j;
}

inline std::string summary_tsv(const std::vector<CycleRecord>& records) {
  // lane order = first appearance in the record stream
  std::vector<std::string> lanes;
  for (const auto& rec : records) {
    bool known = false;
    for (const auto& l : lanes) known = known || l == rec.regime;
    if (!known) lanes.push_back(rec.regime);
  }
  std::string out =
      "regime\tdeployments\tmean_log_loss\tmean_auc\tmean_calibration_error"
      "\tnew_mean_abs_err\told_mean_abs_err\tmean_train_examples\n";
  char buf[64];
  auto add_f = [&](std::string& s, double v) {
    std::snprintf(buf, sizeof(buf), "\t%.9f", v);
    s += buf;
  };
  for (const auto& lane : lanes) {
    size_t n = 0, n_auc = 0, n_new = 0, n_old = 0;
    double loss = 0, auc = 0, cal = 0, new_err = 0, old_err = 0, examples = 0;
    for (const auto& rec : records) {
      if (rec.regime != lane) continue;
      ++n;
      loss += rec.metrics.log_loss;
      cal += rec.metrics.calibration_error;
      examples += static_cast<double>(rec.train.access.examples);
      if (rec.metrics.auc) {
        ++n_auc;
        auc += *rec.metrics.auc;
      }
      if (rec.buckets.fresh.n) {
        ++n_new;
        new_err += rec.buckets.fresh.mean_abs_err;
      }
      if (rec.buckets.stale.n) {
        ++n_old;
        old_err += rec.buckets.stale.mean_abs_err;
      }
    }
    std::string line = lane;
    std::snprintf(buf, sizeof(buf), "\t%zu", n);
    line += buf;
    const double dn = static_cast<double>(n);
    add_f(line, loss / dn);
    add_f(line, n_auc ? auc / static_cast<double>(n_auc) : 0.0);
    add_f(line, cal / dn);
    add_f(line, n_new ? new_err / static_cast<double>(n_new) : 0.0);
    add_f(line, n_old ? old_err / static_cast<double>(n_old) : 0.0);
    add_f(line, examples / dn);
    out += line;
    out += '\n';
  }
  return out;
}

inline std::string cost_tsv(const std::vector<CycleRecord>& records) {
  std::string out = "model_id\tregime\texamples\tsamples_consumed\twall_seconds\n";
  char buf[96];
  for (const auto& rec : records) {
    out += rec.model_id;
    out += '\t';
    out += rec.regime;
    std::snprintf(buf, sizeof(buf), "\t%zu\t%zu\t%.6f\n", rec.train.access.examples,
                  rec.train.samples_consumed, rec.train.wall_seconds);
    out += buf;
  }
  return out;
}

}  // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir = "") {
  cfg.validate();
  const Schedule& sch = cfg.schedule;
  const int64_t warmup = sch.teacher_window;
  const int64_t per_day = sch.students_per_day();
  const int64_t end = warmup + static_cast<int64_t>(cfg.horizon_days) * sch.teacher_period;

  GenerateResult gen = generate_stream(cfg.world, 0, end);
  const std::vector<std::string>& fields = gen.data.field_names;
  const ImpressionSpan all(gen.data.rows);

  const ModelSpec spec = model_spec_for(cfg);
  const uint64_t chash = pipeline_config_hash(cfg);

  PipelineResult res;
  res.config_hash = chash;

  namespace fs = std::filesystem;
  const bool writing = !out_dir.empty();
  if (writing) fs::create_directories(fs::path(out_dir) / "checkpoints");
  std::vector<ojson> metric_records;

  auto checkpoint_path = [&](const std::string& id) {
    return (fs::path(out_dir) / "checkpoints" / (id + ".ckpt")).string();
  };

  // Trains, deploys, evaluates and records one model.
  auto deploy = [&](CycleRecord rec, CtrModel& model, OptimizerState& opt, ImpressionSpan window,
                    const TrainConfig& tc) {
    try {
      rec.train = train_model(model, opt, fields, window, tc);
    } catch (const Error& e) {
      throw Error(rec.model_id + " at t=" + std::to_string(rec.deploy_time) + ": " + e.what());
    }
    model.meta.config_hash = chash;
    rec.eval_start = rec.deploy_time;
    rec.eval_end = rec.deploy_time + sch.student_period;
    const ImpressionSpan eval_rows = slice_window(all, rec.eval_start, rec.eval_end);
    try {
      rec.metrics = evaluate(model, fields, eval_rows);
      rec.buckets = age_bucket_report(model, fields, eval_rows, gen.truth, rec.deploy_time,
                                      sch.teacher_period);
    } catch (const Error& e) {
      throw Error(rec.model_id + " evaluation at t=" + std::to_string(rec.eval_start) + ": " +
                  e.what());
    }
    if (writing) save_checkpoint(model, &opt, checkpoint_path(rec.model_id));
    res.registry.deployments.push_back(Deployment{rec.deploy_time, rec.model_id, rec.regime,
                                                  rec.window_start, rec.window_end,
                                                  rec.parent_id});
    metric_records.push_back(detail::cycle_json(rec, cfg, chash));
    res.records.push_back(std::move(rec));
  };

  CtrModel teacher;
  OptimizerState teacher_opt;
  std::string teacher_id;

  for (int64_t d = 0; d < static_cast<int64_t>(cfg.horizon_days); ++d) {
    const int64_t t_d = warmup + d * sch.teacher_period;
    {
      const ImpressionSpan window = slice_window(all, t_d - sch.teacher_window, t_d);
      const uint64_t seed = mix_seed({cfg.train_seed, kSeedTeacher, static_cast<uint64_t>(d)});
      teacher = scratch_start(spec, vocab_from(fields, window, fields), seed);
      teacher_opt = make_optimizer_state(teacher);
      teacher_id = detail::model_number("teacher_d", d);

      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.batch_size;
      tc.epochs = cfg.teacher_epochs;
      tc.seed = seed;
      CycleRecord rec;
      rec.model_id = teacher_id;
      rec.regime = "teacher";
      rec.is_teacher = true;
      rec.model_seed = seed;
      rec.deploy_time = t_d;
      rec.window_start = t_d - sch.teacher_window;
      rec.window_end = t_d;
      deploy(std::move(rec), teacher, teacher_opt, window, tc);
    }

    for (int64_t s = 0; s < per_day; ++s) {
      const int64_t k = d * per_day + s;
      const int64_t t_k = warmup + k * sch.student_period;
      const uint64_t seed = mix_seed({cfg.train_seed, kSeedStudent, static_cast<uint64_t>(k)});

      const ImpressionSpan history = slice_window(all, t_k - sch.teacher_window, t_k);
      const ImpressionSpan fresh = slice_window(all, t_k - sch.student_window, t_k);

      // Soft targets are a one-shot precomputation against the current
      // teacher, done before any optimization below.
      std::vector<Impression> history_soft, fresh_soft;
      for (Regime r : cfg.regimes) {
        try {
          if (r == Regime::KdOnly && history_soft.empty()) {
            history_soft = with_soft_targets(teacher, history, fields, cfg.kd.temperature);
          }
          if (r == Regime::WsKd && fresh_soft.empty()) {
            fresh_soft = with_soft_targets(teacher, fresh, fields, cfg.kd.temperature);
          }
        } catch (const Error& e) {
          throw Error(std::string("soft targets for ") + regime_name(r) + " at t=" +
                      std::to_string(t_k) + ": " + e.what());
        }
      }

      for (Regime r : cfg.regimes) {
        TrainConfig tc;
        tc.learning_rate = cfg.learning_rate;
        tc.batch_size = cfg.batch_size;
        tc.epochs = cfg.student_epochs;
        tc.use_kd = regime_uses_kd(r);
        tc.kd = cfg.kd;
        tc.seed = seed;

        CycleRecord rec;
        rec.model_id = detail::model_number("student_k", k, ("_" + std::string(regime_name(r))).c_str());
        rec.regime = regime_name(r);
        rec.is_teacher = false;
        rec.model_seed = seed;
        rec.deploy_time = t_k;
        rec.parent_id = (r == Regime::Baseline) ? "-" : teacher_id;

        CtrModel model;
        OptimizerState opt;
        ImpressionSpan window;
        if (regime_uses_ws(r)) {
          rec.window_start = t_k - sch.student_window;
          rec.window_end = t_k;
          const Vocabulary expanded = expand_vocabulary(teacher.vocab, fresh, fields);
          model = warm_start(teacher, expanded, seed);
          opt = warm_start_state(model, teacher, &teacher_opt, cfg.carry_optimizer_state);
          window = (r == Regime::WsKd) ? ImpressionSpan(fresh_soft) : fresh;
        } else {
          rec.window_start = t_k - sch.teacher_window;
          rec.window_end = t_k;
          const ImpressionSpan rows =
              (r == Regime::KdOnly) ? ImpressionSpan(history_soft) : history;
          model = scratch_start(spec, vocab_from(fields, rows, fields), seed);
          opt = make_optimizer_state(model);
          window = rows;
        }
        deploy(std::move(rec), model, opt, window, tc);
      }
    }
  }

  res.registry.validate();
  if (writing) {
    write_text_file((fs::path(out_dir) / "registry.tsv").string(), res.registry.to_tsv());
    write_jsonl((fs::path(out_dir) / "metrics.jsonl").string(), metric_records);
    write_text_file((fs::path(out_dir) / "summary.tsv").string(),
                    detail::summary_tsv(res.records));
    write_text_file((fs::path(out_dir) / "cost.tsv").string(), detail::cost_tsv(res.records));
  }
  return res;
}

// Rebuilds comparison inputs from run records: one RegimeRun per (regime,
// world seed), carrying the chosen per-window metric.
inline std::vector<RegimeRun> runs_for_compare(const std::vector<ojson>& records,
                                               const std::string& metric) {
  std::vector<RegimeRun> runs;
  for (const auto& rec : records) {
    const std::string regime = rec.at("regime").get<std::string>();
    const uint64_t seed = rec.at("world_seed").get<uint64_t>();
    const uint64_t align = parse_hex_u64(rec.at("config_hash").get<std::string>());
    double value = 0.0;
    if (metric == "log_loss" || metric == "calibration_error") {
      value = rec.at(metric).get<double>();
    } else if (metric == "auc") {
      if (rec.at("auc").is_null()) continue;  // single-class window
      value = rec.at("auc").get<double>();
    } else if (metric == "new_abs_err") {
      if (rec.at("new_bucket").at("n").get<size_t>() == 0) continue;
      value = rec.at("new_bucket").at("mean_abs_err").get<double>();
    } else if (metric == "old_abs_err") {
      if (rec.at("old_bucket").at("n").get<size_t>() == 0) continue;
      value = rec.at("old_bucket").at("mean_abs_err").get<double>();
    } else {
      throw ConfigError("unknown comparison metric '" + metric + "'");
    }
    RegimeRun* run = nullptr;
    for (auto& r : runs) {
      if (r.regime == regime && r.seed == seed) run = &r;
    }
    if (run == nullptr) {
      runs.push_back(RegimeRun{regime, seed, align, {}});
      run = &runs.back();
    } else if (run->align_hash != align) {
      throw ConfigError("records for regime " + regime + " mix configurations");
    }
    run->per_window.push_back(value);
  }
  return runs;
}

}  // namespace ctrkd
