#pragma once
// Prequential evaluation: log loss, rank-based AUC, calibration gap, and
// item-age error buckets against world truth. Evaluation substitutes a zero
// embedding vector for unseen feature values instead of failing, mirroring
// how a stale model scores genuinely new traffic. AUC uses average ranks for
// tied scores and is absent when the window has a single label class.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ctrkd/datagen.hpp"
#include "ctrkd/distill.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/model.hpp"

namespace ctrkd {

struct MetricsReport {
  size_t n = 0;
  double log_loss = 0.0;
  std::optional<double> auc;
  double calibration_error = 0.0;  // |mean prediction - empirical rate|
  double mean_pred = 0.0;
  double mean_label = 0.0;
};

inline std::optional<double> rank_auc(const std::vector<double>& scores,
                                      const std::vector<uint8_t>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("rank_auc: size mismatch");
  const size_t n = scores.size();
  size_t n_pos = 0;
  for (auto y : labels) n_pos += y;
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

inline MetricsReport evaluate(const CtrModel& model, const std::vector<std::string>& dataset_fields,
                              ImpressionSpan rows) {
  if (rows.empty()) throw ConfigError("evaluation window is empty");
  const ColumnMap cm = make_column_map(model.spec, dataset_fields);
  const EncodedBatch batch = encode(model.vocab, rows, cm, OovPolicy::ZeroVector);
  const std::vector<double> logits = forward_logits(model, batch);

  MetricsReport rep;
  rep.n = batch.size();
  std::vector<double> probs(rep.n);
  std::vector<uint8_t> labels(rep.n);
  double loss = 0.0, pred_sum = 0.0, label_sum = 0.0;
  for (size_t i = 0; i < rep.n; ++i) {
    const double p = clamp_prob(logistic(logits[i]));
    probs[i] = p;
    labels[i] = batch.labels[i] > 0.5 ? 1 : 0;
    loss += binary_ce(batch.labels[i], p);
    pred_sum += p;
    label_sum += batch.labels[i];
  }
  rep.log_loss = loss / static_cast<double>(rep.n);
  rep.mean_pred = pred_sum / static_cast<double>(rep.n);
  rep.mean_label = label_sum / static_cast<double>(rep.n);
  rep.calibration_error = std::abs(rep.mean_pred - rep.mean_label);
  rep.auc = rank_auc(probs, labels);
  return rep;
}

// Prediction quality against world truth, split by item age at `ref_time`.
// An item is "new" when it was born within `new_threshold` seconds before
// ref_time (or after it).
struct BucketMetrics {
  size_t n = 0;
  double log_loss = 0.0;
  double mean_pred = 0.0;
  double mean_label = 0.0;     // empirical click rate
  double mean_abs_err = 0.0;   // |predicted - true ctr| from world truth
};

struct AgeBucketReport {
  BucketMetrics fresh;  // "new" items
  BucketMetrics stale;  // "old" items
};

inline AgeBucketReport age_bucket_report(const CtrModel& model,
                                         const std::vector<std::string>& dataset_fields,
                                         ImpressionSpan rows, const WorldTruth& truth,
                                         int64_t ref_time, int64_t new_threshold) {
  if (new_threshold < 0) throw ConfigError("new_threshold must be >= 0");
  const ColumnMap cm = make_column_map(model.spec, dataset_fields);
  size_t item_col = dataset_fields.size();
  for (size_t c = 0; c < dataset_fields.size(); ++c) {
    if (dataset_fields[c] == "item") item_col = c;
  }
  if (item_col == dataset_fields.size()) throw ConfigError("dataset has no item field");

  AgeBucketReport rep;
  for (const auto& row : rows) {
    const double pred = predict(model, row, cm, OovPolicy::ZeroVector);
    const std::string& item = row.features[item_col];
    const double err = std::abs(pred - truth.ctr_at(item, row.timestamp));
    BucketMetrics& b =
        truth.birth_time(item) >= ref_time - new_threshold ? rep.fresh : rep.stale;
    ++b.n;
    b.log_loss += binary_ce(static_cast<double>(row.click), pred);
    b.mean_pred += pred;
    b.mean_label += row.click;
    b.mean_abs_err += err;
  }
  for (BucketMetrics* b : {&rep.fresh, &rep.stale}) {
    if (b->n == 0) continue;
    const double inv = 1.0 / static_cast<double>(b->n);
    b->log_loss *= inv;
    b->mean_pred *= inv;
    b->mean_label *= inv;
    b->mean_abs_err *= inv;
  }
  return rep;
}

// One pipeline run seen by the comparator: a regime, the seed it ran under,
// an alignment hash over everything that must match for a paired comparison
// to make sense, and one metric value per evaluation window.
struct RegimeRun {
  std::string regime;
  uint64_t seed = 0;
  uint64_t align_hash = 0;
  std::vector<double> per_window;
};

struct ComparisonRow {
  uint64_t seed = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta = 0.0;  // mean_b - mean_a
};

struct ComparisonTable {
  std::string regime_a, regime_b;
  std::vector<ComparisonRow> rows;  // one per seed, ascending seed order
  size_t b_lower = 0, a_lower = 0, ties = 0;
  double mean_delta = 0.0;
};

inline ComparisonTable compare_regimes(const std::vector<RegimeRun>& runs,
                                       const std::string& regime_a,
                                       const std::string& regime_b) {
  std::vector<const RegimeRun*> a_runs, b_runs;
  for (const auto& r : runs) {
    if (r.regime == regime_a) a_runs.push_back(&r);
    if (r.regime == regime_b) b_runs.push_back(&r);
  }
  if (a_runs.empty() || b_runs.empty()) {
    throw ConfigError("compare_regimes: no runs for regime " +
                      (a_runs.empty() ? regime_a : regime_b));
  }
  auto by_seed = [](const RegimeRun* x, const RegimeRun* y) { return x->seed < y->seed; };
  std::sort(a_runs.begin(), a_runs.end(), by_seed);
  std::sort(b_runs.begin(), b_runs.end(), by_seed);
  if (a_runs.size() != b_runs.size()) {
    throw ConfigError("compare_regimes: regimes cover different seed sets");
  }

  ComparisonTable table;
  table.regime_a = regime_a;
  table.regime_b = regime_b;
  for (size_t i = 0; i < a_runs.size(); ++i) {
    const RegimeRun& a = *a_runs[i];
    const RegimeRun& b = *b_runs[i];
    if (a.seed != b.seed) throw ConfigError("compare_regimes: regimes cover different seed sets");
    if (a.align_hash != b.align_hash) {
      throw ConfigError("compare_regimes: runs for seed " + std::to_string(a.seed) +
                        " come from different configurations");
    }
    if (a.per_window.size() != b.per_window.size() || a.per_window.empty()) {
      throw ConfigError("compare_regimes: runs for seed " + std::to_string(a.seed) +
                        " cover different evaluation windows");
    }
    ComparisonRow row;
    row.seed = a.seed;
    row.mean_a = std::accumulate(a.per_window.begin(), a.per_window.end(), 0.0) /
                 static_cast<double>(a.per_window.size());
    row.mean_b = std::accumulate(b.per_window.begin(), b.per_window.end(), 0.0) /
                 static_cast<double>(b.per_window.size());
    row.delta = row.mean_b - row.mean_a;
    if (row.delta < 0.0) {
      ++table.b_lower;
    } else if (row.delta > 0.0) {
      ++table.a_lower;
    } else {
      ++table.ties;
    }
    table.mean_delta += row.delta;
    table.rows.push_back(row);
  }
  table.mean_delta /= static_cast<double>(table.rows.size());
  return table;
}

}  // namespace ctrkd
