#pragma once
// Mini-batch Adagrad training over an impression window. One optimizer step
// per batch on the batch-mean gradient; rows are reshuffled every epoch from
// a seed substream so a run is reproducible end to end. With `use_kd` the
// per-example gradient follows the distillation objective, otherwise plain
// cross entropy. The two paths share all other code, and alpha = 0 makes the
// distillation term exactly zero, so the KD path with alpha = 0 is
// bit-identical to the plain one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ctrkd/distill.hpp"
#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/model.hpp"
#include "ctrkd/optimizer.hpp"
#include "ctrkd/prng.hpp"

namespace ctrkd {

struct TrainConfig {
  double learning_rate = 0.05;
  size_t batch_size = 256;
  size_t epochs = 1;
  bool use_kd = false;
  KdConfig kd;
  uint64_t seed = 0;  // base of the per-epoch shuffle substream

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate must be positive");
    }
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (use_kd) kd.validate();
  }
};

// What a training call actually touched, for isolation checks.
struct AccessStats {
  int64_t min_timestamp = std::numeric_limits<int64_t>::max();
  int64_t max_timestamp = std::numeric_limits<int64_t>::min();
  size_t examples = 0;
};

struct TrainResult {
  std::vector<double> epoch_mean_loss;
  AccessStats access;
  size_t samples_consumed = 0;  // examples * epochs
  double wall_seconds = 0.0;
};

inline TrainResult train_model(CtrModel& model, OptimizerState& opt,
                               const std::vector<std::string>& dataset_fields,
                               ImpressionSpan rows, const TrainConfig& cfg) {
  cfg.validate();
  if (rows.empty()) throw ConfigError("training window is empty");
  const auto t_start = std::chrono::steady_clock::now();

  const ColumnMap cm = make_column_map(model.spec, dataset_fields);
  const EncodedBatch batch = encode(model.vocab, rows, cm, OovPolicy::Error);
  const size_t n = batch.size();

  TrainResult res;
  res.access.examples = n;
  for (size_t i = 0; i < n; ++i) {
    res.access.min_timestamp = std::min(res.access.min_timestamp, batch.timestamps[i]);
    res.access.max_timestamp = std::max(res.access.max_timestamp, batch.timestamps[i]);
  }
  if (cfg.use_kd) {
    for (size_t i = 0; i < n; ++i) {
      if (std::isnan(batch.soft_targets[i])) {
        throw ConfigError("kd training requires a soft target on every row");
      }
    }
  }

  Workspace ws;
  ws.resize_for(model);
  Gradients grads = zeros_like(model);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Xoshiro256pp shuffle_rng(mix_seed({cfg.seed, kSeedShuffle, epoch}));
    for (size_t i = n; i > 1; --i) {
      const size_t j = static_cast<size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const size_t end = std::min(begin + cfg.batch_size, n);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto& t : grads.tables) std::fill(t.begin(), t.end(), 0.0);
      for (auto& l : grads.hidden) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
      }
      std::fill(grads.output.w.begin(), grads.output.w.end(), 0.0);
      std::fill(grads.output.b.begin(), grads.output.b.end(), 0.0);

      for (size_t k = begin; k < end; ++k) {
        const size_t i = order[k];
        const auto idx = batch.row(i);
        const double z = detail::forward_cached(model, idx, ws);
        const double y = batch.labels[i];
        double dl_dz;
        if (cfg.use_kd) {
          const double soft = batch.soft_targets[i];
          epoch_loss += kd_loss(y, z, soft, cfg.kd);
          dl_dz = kd_loss_grad(y, z, soft, cfg.kd);
        } else {
          epoch_loss += binary_ce(y, clamp_prob(logistic(z)));
          dl_dz = logistic(z) - y;
        }
        backward_cached(model, idx, dl_dz * inv, grads, ws);
      }
      apply_gradients(model, opt, grads, cfg.learning_rate);
    }
    res.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(n));
  }

  double label_sum = 0.0;
  for (size_t i = 0; i < n; ++i) label_sum += batch.labels[i];
  model.meta.label_mean = label_sum / static_cast<double>(n);

  res.samples_consumed = n * cfg.epochs;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace ctrkd
