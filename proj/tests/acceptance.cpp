// Acceptance gate. Each criterion prints exactly one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails.

#include <ctrkd/ctrkd.hpp>

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace ctrkd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

constexpr int64_t kHour = 3600;

// ---------------------------------------------------------------------------
// 1. Analytic gradients of the full distillation objective, checked through
//    the whole network against central finite differences.
// ---------------------------------------------------------------------------

Outcome criterion_gradients() {
  const std::vector<std::string> fields = {"f0", "f1"};
  size_t n_models = 0;
  double worst = 0.0;

  for (uint64_t s = 1; s <= 22; ++s) {
    Xoshiro256pp rng(mix_seed({s, 77}));
    Vocabulary vocab(fields);
    const size_t v0 = 3 + rng.below(3), v1 = 2 + rng.below(3);
    for (size_t i = 0; i < v0; ++i) vocab.insert(0, "a" + std::to_string(i));
    for (size_t i = 0; i < v1; ++i) vocab.insert(1, "b" + std::to_string(i));

    ModelSpec spec;
    spec.fields = {{"f0", 3}, {"f1", 2}};
    spec.hidden = (s % 3 == 0) ? std::vector<size_t>{3, 2} : std::vector<size_t>{4};
    CtrModel m = init_model(spec, vocab, 13 * s + 1);
    // Generic biases keep every pre-activation away from the relu kink,
    // where a central difference would straddle the non-differentiable point.
    for (auto& l : m.hidden) {
      for (auto& b : l.b) b = rng.uniform(-0.3, 0.3);
    }
    m.output.b[0] = rng.uniform(-0.3, 0.3);

    KdConfig kd;
    kd.alpha = (s % 5 == 0) ? 0.0 : 2.0 * rng.uniform01();
    kd.temperature = 1.0 + 3.0 * rng.uniform01();
    kd.scale_distill_by_t2 = (s % 2 == 0);

    std::vector<Impression> batch;
    for (size_t i = 0; i < 6; ++i) {
      Impression imp;
      imp.timestamp = static_cast<int64_t>(i);
      imp.features = {vocab.values(0)[rng.below(v0)], vocab.values(1)[rng.below(v1)]};
      imp.click = static_cast<uint8_t>(rng.below(2));
      imp.soft_target = 0.05 + 0.9 * rng.uniform01();
      batch.push_back(imp);
    }
    const ColumnMap cm = make_column_map(spec, fields);
    const EncodedBatch enc = encode(vocab, batch, cm, OovPolicy::Error);
    const size_t n = enc.size();

    auto objective = [&](const CtrModel& model) {
      const std::vector<double> z = forward_logits(model, enc);
      double total = 0.0;
      for (size_t i = 0; i < n; ++i) {
        total += kd_loss(enc.labels[i], z[i], enc.soft_targets[i], kd);
      }
      return total / static_cast<double>(n);
    };

    const std::vector<double> z = forward_logits(m, enc);
    std::vector<double> dz(n);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = 0; i < n; ++i) {
      dz[i] = kd_loss_grad(enc.labels[i], z[i], enc.soft_targets[i], kd) /
              static_cast<double>(n);
    }
    Gradients grads = backward(m, enc, order, dz);

    auto blocks = param_blocks(m);
    auto grad_blocks = set_blocks(m, grads);
    const double h = 1e-6;
    for (size_t b = 0; b < blocks.size(); ++b) {
      std::vector<double>& p = *blocks[b].data;
      for (size_t j = 0; j < p.size(); ++j) {
        const double saved = p[j];
        p[j] = saved + h;
        const double up = objective(m);
        p[j] = saved - h;
        const double dn = objective(m);
        p[j] = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double an = (*grad_blocks[b])[j];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
        worst = std::max(worst, std::abs(fd - an) / denom);
      }
    }
    ++n_models;
  }

  Outcome o;
  o.pass = n_models >= 20 && worst <= 1e-4;
  o.detail = fmt("%zu models, max rel err %.2e", n_models, worst);
  return o;
}

// ---------------------------------------------------------------------------
// 2. With alpha = 0 the distilling regimes must collapse, bit for bit, onto
//    their plain counterparts over a full multi-day run with shared seeds.
// ---------------------------------------------------------------------------

PipelineConfig small_pipeline_config(uint64_t world_seed) {
  PipelineConfig cfg;
  cfg.world.seed = world_seed;
  cfg.world.n_items_initial = 8;
  cfg.world.n_publishers = 3;
  cfg.world.n_user_segments = 3;
  cfg.world.impressions_per_hour = 100;
  cfg.world.base_ctr = 0.08;
  cfg.world.drift_sigma = 0.05;
  cfg.world.new_item_rate = 0.5;
  cfg.world.item_logit_sigma = 1.0;
  cfg.schedule.teacher_window = 24 * kHour;
  cfg.schedule.teacher_period = 24 * kHour;
  cfg.schedule.student_period = 4 * kHour;
  cfg.schedule.student_window = 4 * kHour;
  cfg.embedding_dims = {4, 3, 2, 2};
  cfg.hidden = {8};
  cfg.batch_size = 64;
  return cfg;
}

Outcome criterion_regime_collapse() {
  PipelineConfig cfg = small_pipeline_config(4242);
  cfg.horizon_days = 3;
  cfg.kd.alpha = 0.0;

  testutil::TempDir dir("acc_collapse");
  run_pipeline(cfg, dir.file("out"));

  const std::filesystem::path ck = std::filesystem::path(dir.file("out")) / "checkpoints";
  const int64_t ticks = 3 * cfg.schedule.students_per_day();
  size_t pairs = 0;
  for (int64_t k = 0; k < ticks; ++k) {
    char id[32];
    snprintf(id, sizeof(id), "student_k%03" PRId64, k);
    const auto ws_kd = testutil::read_bytes((ck / (std::string(id) + "_ws_kd.ckpt")).string());
    const auto ws_only =
        testutil::read_bytes((ck / (std::string(id) + "_ws_only.ckpt")).string());
    const auto kd_only =
        testutil::read_bytes((ck / (std::string(id) + "_kd_only.ckpt")).string());
    const auto baseline =
        testutil::read_bytes((ck / (std::string(id) + "_baseline.ckpt")).string());
    if (ws_kd != ws_only) return {false, fmt("ws pair differs at tick %" PRId64, k)};
    if (kd_only != baseline) return {false, fmt("scratch pair differs at tick %" PRId64, k)};
    pairs += 2;
  }
  return {true, fmt("%zu checkpoint pairs byte-identical over %" PRId64 " ticks", pairs, ticks)};
}

// ---------------------------------------------------------------------------
// 3. Warm start: shared parameters bit-equal to the teacher; rows for new
//    vocabulary entries independent of which teacher seeded the student.
// ---------------------------------------------------------------------------

Outcome criterion_warm_start() {
  const std::vector<std::string> fields = {"item", "hour"};
  std::vector<Impression> hist, fresh;
  const char* items[] = {"i0", "i1", "i2"};
  for (int i = 0; i < 60; ++i) {
    Impression imp;
    imp.timestamp = i;
    imp.features = {items[i % 3], (i % 2) ? "h1" : "h0"};
    imp.click = static_cast<uint8_t>((i % 5) == 0);
    hist.push_back(imp);
  }
  for (int i = 0; i < 8; ++i) {
    Impression imp;
    imp.timestamp = 100 + i;
    imp.features = {(i % 2) ? "i4" : "i3", "h0"};
    imp.click = 0;
    fresh.push_back(imp);
  }

  ModelSpec spec;
  spec.fields = {{"item", 3}, {"hour", 2}};
  spec.hidden = {4};
  const Vocabulary base = vocab_from(fields, hist, fields);

  TrainConfig tc;
  tc.batch_size = 16;
  tc.seed = 5;
  CtrModel ta = init_model(spec, base, 101);
  CtrModel tb = init_model(spec, base, 202);
  OptimizerState oa = make_optimizer_state(ta), ob = make_optimizer_state(tb);
  train_model(ta, oa, fields, hist, tc);
  train_model(tb, ob, fields, hist, tc);
  if (parameter_digest(ta) == parameter_digest(tb)) return {false, "teachers coincide"};

  const Vocabulary expanded = expand_vocabulary(ta.vocab, fresh, fields);
  const CtrModel sa = warm_start(ta, expanded, 7);
  const CtrModel sb = warm_start(tb, expanded, 7);

  // Shared rows and dense layers copy the teacher exactly.
  for (size_t f = 0; f < ta.tables.size(); ++f) {
    const size_t shared = ta.vocab.size(f) * ta.tables[f].dim;
    for (size_t j = 0; j < shared; ++j) {
      if (sa.tables[f].w[j] != ta.tables[f].w[j]) return {false, "shared row diverged"};
    }
  }
  for (size_t l = 0; l < ta.hidden.size(); ++l) {
    if (sa.hidden[l].w != ta.hidden[l].w || sa.hidden[l].b != ta.hidden[l].b) {
      return {false, "hidden layer diverged"};
    }
  }
  if (sa.output.w != ta.output.w || sa.output.b != ta.output.b) {
    return {false, "output layer diverged"};
  }

  // New rows depend only on (seed, field, row), not on the teacher.
  const size_t item_f = 0;
  size_t new_rows = 0;
  for (size_t r = ta.vocab.size(item_f); r < expanded.size(item_f); ++r) {
    const auto ra = sa.tables[item_f].row(r);
    const auto rb = sb.tables[item_f].row(r);
    std::vector<double> direct(ra.size());
    init_embedding_row(direct, 7, item_f, r);
    for (size_t j = 0; j < ra.size(); ++j) {
      if (ra[j] != rb[j] || ra[j] != direct[j]) return {false, "new row depends on teacher"};
    }
    ++new_rows;
  }
  if (new_rows != 2) return {false, fmt("expected 2 new rows, saw %zu", new_rows)};
  if (sa.tables[item_f].row(0)[0] == sb.tables[item_f].row(0)[0]) {
    return {false, "students unexpectedly share old rows"};
  }
  return {true, "shared params bit-equal, 2 new rows teacher-independent"};
}

// ---------------------------------------------------------------------------
// 4. Schedule: one day after warmup yields exactly 1 teacher and 6 students
//    per regime; every incremental student touched exactly the last 4 hours.
// ---------------------------------------------------------------------------

Outcome criterion_schedule() {
  PipelineConfig cfg = small_pipeline_config(77);
  cfg.world.impressions_per_hour = 60;
  cfg.horizon_days = 1;

  const PipelineResult res = run_pipeline(cfg);
  const int64_t warmup = cfg.schedule.teacher_window;
  const int64_t sp = cfg.schedule.student_period;

  size_t teachers = 0;
  std::map<std::string, std::vector<const CycleRecord*>> students;
  for (const auto& rec : res.records) {
    if (rec.is_teacher) {
      ++teachers;
    } else {
      students[rec.regime].push_back(&rec);
    }
  }
  if (teachers != 1) return {false, fmt("%zu teachers", teachers)};
  if (students.size() != 4) return {false, fmt("%zu regimes", students.size())};

  for (const auto& [regime, recs] : students) {
    if (recs.size() != 6) return {false, fmt("%s: %zu students", regime.c_str(), recs.size())};
    for (size_t k = 0; k < recs.size(); ++k) {
      const CycleRecord& r = *recs[k];
      const int64_t t_k = warmup + static_cast<int64_t>(k) * sp;
      if (r.deploy_time != t_k) return {false, fmt("%s k=%zu deploy time", regime.c_str(), k)};
      const bool ws = regime == "ws_only" || regime == "ws_kd";
      const int64_t want_start = ws ? t_k - cfg.schedule.student_window
                                    : t_k - cfg.schedule.teacher_window;
      if (r.window_start != want_start || r.window_end != t_k) {
        return {false, fmt("%s k=%zu window [%" PRId64 ", %" PRId64 ")", regime.c_str(), k,
                           r.window_start, r.window_end)};
      }
      // The trainer reports exactly what it read.
      if (r.train.access.min_timestamp < r.window_start ||
          r.train.access.max_timestamp >= r.window_end) {
        return {false, fmt("%s k=%zu read outside its window", regime.c_str(), k)};
      }
      const size_t hours = static_cast<size_t>((r.window_end - r.window_start) / kHour);
      if (r.train.access.examples != hours * cfg.world.impressions_per_hour) {
        return {false, fmt("%s k=%zu consumed %zu examples", regime.c_str(), k,
                           r.train.access.examples)};
      }
    }
  }
  return {true, "1 teacher, 6 students x 4 regimes, incremental windows exact"};
}

// ---------------------------------------------------------------------------
// 5. Forgetting under an abrupt shift: distillation keeps pre-shift accuracy
//    (vs plain fine-tuning) without giving up post-shift adaptation (vs the
//    stale teacher).
// ---------------------------------------------------------------------------

struct ForgettingRun {
  double a_ws_only = 0.0;
  double a_ws_kd = 0.0;
  double b_teacher = 0.0;
  double b_ws_kd = 0.0;
};

ForgettingRun run_forgetting_seed(uint64_t seed_index) {
  const int64_t t_shift = 168 * kHour;

  WorldConfig world;
  world.seed = 510 + seed_index;
  world.n_items_initial = 12;
  world.n_publishers = 4;
  world.n_user_segments = 4;
  world.impressions_per_hour = 150;
  world.base_ctr = 0.06;
  world.drift_sigma = 0.01;
  world.new_item_rate = 0.2;
  world.item_logit_sigma = 1.0;
  for (int j = 0; j < 6; ++j) {
    TrendEvent e;
    e.time = t_shift;
    e.target_field = "item";
    e.target_value = detail::item_name(static_cast<size_t>(j));
    e.shift = (j % 2 == 0) ? 3.0 : -3.0;
    e.duration = 48 * kHour;
    world.trend_events.push_back(e);
  }

  const GenerateResult gen = generate_stream(world, 0, 176 * kHour);
  const std::vector<std::string>& fields = gen.data.field_names;
  const ImpressionSpan all(gen.data.rows);
  const ImpressionSpan hist = slice_window(all, 0, t_shift);
  const ImpressionSpan fresh = slice_window(all, t_shift, t_shift + 4 * kHour);
  const ImpressionSpan hold_a = slice_window(all, t_shift - 4 * kHour, t_shift);
  const ImpressionSpan hold_b = slice_window(all, t_shift + 4 * kHour, t_shift + 8 * kHour);

  ModelSpec spec;
  spec.fields = {{"item", 6}, {"publisher", 3}, {"user_segment", 3}, {"hour_of_day", 3}};
  spec.hidden = {12};

  CtrModel teacher = init_model(spec, vocab_from(fields, hist, fields), 1000 + seed_index);
  OptimizerState topt = make_optimizer_state(teacher);
  TrainConfig tc;
  tc.seed = 2000 + seed_index;
  train_model(teacher, topt, fields, hist, tc);

  const std::vector<Impression> fresh_soft = with_soft_targets(teacher, fresh, fields, 2.0);
  const Vocabulary expanded = expand_vocabulary(teacher.vocab, fresh, fields);

  TrainConfig sc;
  sc.batch_size = 64;
  sc.epochs = 4;
  sc.seed = 4000 + seed_index;

  CtrModel ws_only = warm_start(teacher, expanded, 3000 + seed_index);
  OptimizerState so = warm_start_state(ws_only, teacher, &topt, false);
  train_model(ws_only, so, fields, fresh, sc);

  CtrModel ws_kd = warm_start(teacher, expanded, 3000 + seed_index);
  OptimizerState sk = warm_start_state(ws_kd, teacher, &topt, false);
  TrainConfig kc = sc;
  kc.use_kd = true;
  kc.kd.alpha = 0.5;
  kc.kd.temperature = 2.0;
  train_model(ws_kd, sk, fields, fresh_soft, kc);

  ForgettingRun r;
  r.a_ws_only = evaluate(ws_only, fields, hold_a).log_loss;
  r.a_ws_kd = evaluate(ws_kd, fields, hold_a).log_loss;
  r.b_teacher = evaluate(teacher, fields, hold_b).log_loss;
  r.b_ws_kd = evaluate(ws_kd, fields, hold_b).log_loss;
  return r;
}

Outcome criterion_forgetting() {
  int wins_a = 0, wins_b = 0;
  for (uint64_t s = 0; s < 5; ++s) {
    const ForgettingRun r = run_forgetting_seed(s);
    if (r.a_ws_kd < r.a_ws_only) ++wins_a;
    if (r.b_ws_kd <= r.b_teacher) ++wins_b;
  }
  Outcome o;
  o.pass = wins_a >= 4 && wins_b >= 4;
  o.detail = fmt("pre-shift holdout %d/5, post-shift holdout %d/5", wins_a, wins_b);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Freshness: on items born recently, the fine-tuned student beats the
//    stale teacher, and its edge is concentrated on those new items.
// ---------------------------------------------------------------------------

Outcome criterion_freshness() {
  int wins_new = 0;
  double rel_new_sum = 0.0, rel_old_sum = 0.0;

  for (uint64_t s = 0; s < 5; ++s) {
    WorldConfig world;
    world.seed = 910 + s;
    world.n_items_initial = 25;
    world.n_publishers = 4;
    world.n_user_segments = 4;
    world.impressions_per_hour = 400;
    world.base_ctr = 0.15;
    world.drift_sigma = 0.005;
    world.new_item_rate = 1.5;
    world.item_logit_sigma = 1.2;
    world.new_item_popularity_mean = -0.5;

    const GenerateResult gen = generate_stream(world, 0, 72 * kHour);
    const std::vector<std::string>& fields = gen.data.field_names;
    const ImpressionSpan all(gen.data.rows);
    const ImpressionSpan hist = slice_window(all, 0, 48 * kHour);
    const ImpressionSpan fresh = slice_window(all, 64 * kHour, 68 * kHour);
    const ImpressionSpan holdout = slice_window(all, 68 * kHour, 72 * kHour);

    ModelSpec spec;
    spec.fields = {{"item", 6}, {"publisher", 3}, {"user_segment", 3}, {"hour_of_day", 3}};
    spec.hidden = {12};

    CtrModel teacher = init_model(spec, vocab_from(fields, hist, fields), 600 + s);
    OptimizerState topt = make_optimizer_state(teacher);
    TrainConfig tc;
    tc.seed = 700 + s;
    train_model(teacher, topt, fields, hist, tc);

    const std::vector<Impression> fresh_soft = with_soft_targets(teacher, fresh, fields, 2.0);
    CtrModel student = warm_start(teacher, expand_vocabulary(teacher.vocab, fresh, fields),
                                  800 + s);
    OptimizerState sopt = warm_start_state(student, teacher, &topt, false);
    TrainConfig sc;
    sc.batch_size = 64;
    sc.epochs = 4;
    sc.use_kd = true;
    sc.kd.alpha = 0.5;
    sc.kd.temperature = 2.0;
    sc.seed = 900 + s;
    train_model(student, sopt, fields, fresh_soft, sc);

    const int64_t ref = 68 * kHour, threshold = 24 * kHour;
    const AgeBucketReport tb = age_bucket_report(teacher, fields, holdout, gen.truth, ref,
                                                 threshold);
    const AgeBucketReport sb = age_bucket_report(student, fields, holdout, gen.truth, ref,
                                                 threshold);
    if (tb.fresh.n == 0 || tb.stale.n == 0) return {false, "empty age bucket"};
    if (tb.fresh.n != sb.fresh.n) return {false, "bucket split disagrees"};

    if (sb.fresh.mean_abs_err < tb.fresh.mean_abs_err) ++wins_new;
    rel_new_sum += (tb.fresh.mean_abs_err - sb.fresh.mean_abs_err) / tb.fresh.mean_abs_err;
    rel_old_sum += (tb.stale.mean_abs_err - sb.stale.mean_abs_err) / tb.stale.mean_abs_err;
  }

  Outcome o;
  o.pass = wins_new >= 4 && rel_new_sum > rel_old_sum;
  o.detail = fmt("new-item wins %d/5, mean rel gain new %.3f vs old %.3f", wins_new,
                 rel_new_sum / 5.0, rel_old_sum / 5.0);
  return o;
}

// ---------------------------------------------------------------------------
// 7. Cost: at the default cadence with equal epochs, students are cheap and
//    the sample ratio equals the configured window ratio exactly.
// ---------------------------------------------------------------------------

Outcome criterion_cost() {
  PipelineConfig cfg;
  cfg.world.seed = 11;
  cfg.world.n_items_initial = 20;
  cfg.world.n_publishers = 4;
  cfg.world.n_user_segments = 4;
  cfg.world.impressions_per_hour = 500;
  cfg.world.new_item_rate = 1.0;
  cfg.horizon_days = 1;
  cfg.regimes = {Regime::WsKd};
  cfg.teacher_epochs = 1;
  cfg.student_epochs = 1;

  const PipelineResult res = run_pipeline(cfg);
  const CostReport rep = measure_training_cost(res);
  const double window_ratio = static_cast<double>(cfg.schedule.teacher_window) /
                              static_cast<double>(cfg.schedule.student_window);

  Outcome o;
  o.pass = rep.n_teachers == 1 && rep.n_students == 6 && rep.sample_ratio == window_ratio &&
           rep.wall_ratio > 5.0;
  o.detail = fmt("sample ratio %.1f (windows %.1f), wall ratio %.1f", rep.sample_ratio,
                 window_ratio, rep.wall_ratio);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Metric oracles: ranking AUC against a brute-force pairwise count, and
//    the constant predictor's log-loss against label entropy.
// ---------------------------------------------------------------------------

Outcome criterion_metric_oracles() {
  Xoshiro256pp rng(mix_seed({88, 1}));
  double worst_auc = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 2 + rng.below(199);
    std::vector<double> scores(n);
    std::vector<uint8_t> labels(n);
    for (size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(25)) / 8.0;
      labels[i] = static_cast<uint8_t>(rng.below(2));
    }
    labels[0] = 0;
    labels[n - 1] = 1;

    double num = 0.0;
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!labels[i]) continue;
      ++n_pos;
      for (size_t j = 0; j < n; ++j) {
        if (labels[j]) continue;
        if (scores[i] > scores[j]) num += 1.0;
        else if (scores[i] == scores[j]) num += 0.5;
      }
    }
    n_neg = n - n_pos;
    const double brute = num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    const auto fast = rank_auc(scores, labels);
    if (!fast) return {false, "rank_auc returned no value on a two-class window"};
    worst_auc = std::max(worst_auc, std::abs(*fast - brute));
  }
  if (worst_auc > 1e-12) return {false, fmt("auc deviates by %.2e", worst_auc)};

  // Constant predictor at the empirical rate must score the label entropy.
  double worst_ent = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 2 + rng.below(399);
    const size_t k = 1 + rng.below(n - 1);
    const double p = static_cast<double>(k) / static_cast<double>(n);

    Vocabulary vocab({"f"});
    vocab.insert(0, "v");
    ModelSpec spec;
    spec.fields = {{"f", 1}};
    spec.hidden = {};
    CtrModel m = init_model(spec, vocab, 1);
    for (auto& blk : param_blocks(m)) std::fill(blk.data->begin(), blk.data->end(), 0.0);
    m.output.b[0] = std::log(p / (1.0 - p));

    std::vector<Impression> rows(n);
    for (size_t i = 0; i < n; ++i) {
      rows[i].timestamp = static_cast<int64_t>(i);
      rows[i].features = {"v"};
      rows[i].click = i < k;
    }
    const double entropy = -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
    const MetricsReport rep = evaluate(m, {"f"}, rows);
    worst_ent = std::max(worst_ent, std::abs(rep.log_loss - entropy));
  }
  if (worst_ent > 1e-12) return {false, fmt("entropy deviates by %.2e", worst_ent)};

  return {true, fmt("1000 auc trials (max dev %.1e), 200 entropy trials (max dev %.1e)",
                    worst_auc, worst_ent)};
}

// ---------------------------------------------------------------------------
// 9. Determinism: identical configs reproduce every artifact byte for byte.
// ---------------------------------------------------------------------------

Outcome criterion_determinism() {
  PipelineConfig cfg = small_pipeline_config(99);
  cfg.world.impressions_per_hour = 80;
  cfg.horizon_days = 1;
  cfg.kd.alpha = 0.5;

  testutil::TempDir d1("acc_det1"), d2("acc_det2");
  run_pipeline(cfg, d1.file("out"));
  run_pipeline(cfg, d2.file("out"));

  namespace fs = std::filesystem;
  const fs::path o1 = d1.file("out"), o2 = d2.file("out");
  size_t compared = 0;
  for (const char* name : {"registry.tsv", "metrics.jsonl", "summary.tsv"}) {
    if (testutil::read_bytes((o1 / name).string()) !=
        testutil::read_bytes((o2 / name).string())) {
      return {false, fmt("%s differs", name)};
    }
    ++compared;
  }

  std::vector<std::string> names1, names2;
  for (const auto& e : fs::directory_iterator(o1 / "checkpoints")) {
    names1.push_back(e.path().filename().string());
  }
  for (const auto& e : fs::directory_iterator(o2 / "checkpoints")) {
    names2.push_back(e.path().filename().string());
  }
  std::sort(names1.begin(), names1.end());
  std::sort(names2.begin(), names2.end());
  if (names1 != names2 || names1.empty()) return {false, "checkpoint sets differ"};
  for (const auto& n : names1) {
    if (testutil::read_bytes((o1 / "checkpoints" / n).string()) !=
        testutil::read_bytes((o2 / "checkpoints" / n).string())) {
      return {false, fmt("%s differs", n.c_str())};
    }
    ++compared;
  }
  return {true, fmt("%zu artifacts byte-identical", compared)};
}

}  // namespace

int main() {
  struct Check {
    int id;
    const char* what;
    std::function<Outcome()> fn;
  };
  const std::vector<Check> checks = {
      {1, "analytic gradients match central finite differences through the network",
       criterion_gradients},
      {2, "alpha=0 distillation collapses bit-for-bit onto the plain regimes",
       criterion_regime_collapse},
      {3, "warm start copies shared parameters and seeds new rows teacher-independently",
       criterion_warm_start},
      {4, "one day deploys 1 teacher and 6 students per regime on exact windows",
       criterion_schedule},
      {5, "distillation retains pre-shift accuracy and still adapts past the teacher",
       criterion_forgetting},
      {6, "fine-tuned students beat the stale teacher on newly launched items",
       criterion_freshness},
      {7, "students are >5x cheaper by wall clock and match the window ratio in samples",
       criterion_cost},
      {8, "auc equals brute-force pairwise counting and log-loss matches label entropy",
       criterion_metric_oracles},
      {9, "identical configs reproduce registries, checkpoints and reports byte-for-byte",
       criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    printf("[%s] criterion %d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.what,
           o.detail.c_str(), secs);
    fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
