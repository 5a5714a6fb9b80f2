// Command line front end. Times on the command line are simulated hours;
// all on-disk records use simulated seconds.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctrkd/ctrkd.hpp"

namespace {

int64_t hours_to_s(double h) { return static_cast<int64_t>(std::llround(h * 3600.0)); }

ctrkd::ojson report_json(const ctrkd::MetricsReport& rep) {
  ctrkd::ojson j;
  j["n"] = rep.n;
  j["log_loss"] = rep.log_loss;
  if (rep.auc) {
    j["auc"] = *rep.auc;
  } else {
    j["auc"] = nullptr;
  }
  j["calibration_error"] = rep.calibration_error;
  j["mean_pred"] = rep.mean_pred;
  j["mean_label"] = rep.mean_label;
  return j;
}

ctrkd::ojson bucket_json(const ctrkd::BucketMetrics& b) {
  ctrkd::ojson j;
  j["n"] = b.n;
  j["log_loss"] = b.log_loss;
  j["mean_pred"] = b.mean_pred;
  j["mean_label"] = b.mean_label;
  j["mean_abs_err"] = b.mean_abs_err;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ctrkd;
  CLI::App app{"Incremental CTR training pipeline (teacher/student with warm start and KD)"};
  app.require_subcommand(1);

  std::string config_path, data_path, truth_path, out_path, model_path, teacher_path;
  std::string regime_str = "ws_kd", metric = "log_loss";
  std::string regime_a, regime_b;
  std::vector<std::string> metrics_files;
  double from_h = 0.0, to_h = 0.0, ref_h = -1.0, threshold_h = 24.0;
  bool with_truth = false;

  auto* generate = app.add_subcommand("generate", "Generate a synthetic impression stream");
  generate->add_option("--config", config_path, "Run config (only [world] is used)")->required();
  generate->add_option("--from", from_h, "Window start, hours")->required();
  generate->add_option("--to", to_h, "Window end, hours")->required();
  generate->add_option("--out", out_path, "Dataset file to write")->required();
  generate->add_option("--truth", truth_path, "Truth sidecar to write (optional)");

  auto* teach = app.add_subcommand("train-teacher", "Train a teacher on a history window");
  teach->add_option("--config", config_path, "Run config")->required();
  teach->add_option("--data", data_path, "Dataset file")->required();
  teach->add_option("--from", from_h, "Window start, hours")->required();
  teach->add_option("--to", to_h, "Window end, hours")->required();
  teach->add_option("--out", out_path, "Checkpoint to write")->required();

  auto* student = app.add_subcommand("train-student", "Train one student under a regime");
  student->add_option("--config", config_path, "Run config")->required();
  student->add_option("--regime", regime_str, "baseline|kd_only|ws_only|ws_kd")->required();
  student->add_option("--teacher", teacher_path, "Teacher checkpoint (WS/KD regimes)");
  student->add_option("--data", data_path, "Dataset file")->required();
  student->add_option("--from", from_h, "Window start, hours")->required();
  student->add_option("--to", to_h, "Window end, hours")->required();
  student->add_option("--out", out_path, "Checkpoint to write")->required();

  auto* pipeline = app.add_subcommand("run-pipeline", "Run the full deployment simulation");
  pipeline->add_option("--config", config_path, "Run config")->required();
  pipeline->add_option("--out", out_path, "Output directory")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a dataset window");
  evaluate_cmd->add_option("--model", model_path, "Checkpoint")->required();
  evaluate_cmd->add_option("--data", data_path, "Dataset file")->required();
  evaluate_cmd->add_option("--from", from_h, "Window start, hours")->required();
  evaluate_cmd->add_option("--to", to_h, "Window end, hours")->required();
  evaluate_cmd->add_option("--truth", truth_path, "Truth sidecar for age buckets");
  evaluate_cmd->add_option("--ref-time", ref_h, "Bucket reference time, hours (default: window start)");
  evaluate_cmd->add_option("--new-threshold", threshold_h, "Age threshold, hours");

  auto* compare = app.add_subcommand("compare", "Paired regime comparison from metrics files");
  compare->add_option("--metrics", metrics_files, "metrics.jsonl files (one per run)")
      ->required()
      ->expected(-1);
  compare->add_option("--regime-a", regime_a, "First regime lane")->required();
  compare->add_option("--regime-b", regime_b, "Second regime lane")->required();
  compare->add_option("--metric", metric,
                      "log_loss|auc|calibration_error|new_abs_err|old_abs_err");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      PipelineConfig cfg = parse_config_file(config_path);
      GenerateResult gen = generate_stream(cfg.world, hours_to_s(from_h), hours_to_s(to_h));
      write_dataset(out_path, gen.data);
      std::printf("wrote %zu impressions to %s\n", gen.data.rows.size(), out_path.c_str());
      if (!truth_path.empty()) {
        write_truth(truth_path, gen.truth);
        std::printf("wrote truth for %zu items to %s\n", gen.truth.items.size(),
                    truth_path.c_str());
      }
    } else if (*teach) {
      PipelineConfig cfg = parse_config_file(config_path);
      Dataset data = read_dataset(data_path);
      ImpressionSpan window = slice_window(data, hours_to_s(from_h), hours_to_s(to_h));
      const uint64_t seed = mix_seed({cfg.train_seed, kSeedTeacher, 0});
      CtrModel model = scratch_start(model_spec_for(cfg),
                                     vocab_from(world_field_names(), window, data.field_names),
                                     seed);
      model.meta.config_hash = pipeline_config_hash(cfg);
      OptimizerState opt = make_optimizer_state(model);
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.batch_size;
      tc.epochs = cfg.teacher_epochs;
      tc.seed = seed;
      TrainResult tr = train_model(model, opt, data.field_names, window, tc);
      save_checkpoint(model, &opt, out_path);
      std::printf("teacher: %zu examples, loss %.6f -> %.6f, saved %s\n",
                  tr.access.examples, tr.epoch_mean_loss.front(), tr.epoch_mean_loss.back(),
                  out_path.c_str());
    } else if (*student) {
      PipelineConfig cfg = parse_config_file(config_path);
      const Regime regime = parse_regime(regime_str);
      Dataset data = read_dataset(data_path);
      const int64_t t0 = hours_to_s(from_h), t1 = hours_to_s(to_h);
      ImpressionSpan window = slice_window(data, t0, t1);

      std::optional<LoadedCheckpoint> teacher;
      if (!teacher_path.empty()) teacher = load_checkpoint(teacher_path);
      if ((regime_uses_ws(regime) || regime_uses_kd(regime)) && !teacher) {
        throw ConfigError("regime " + regime_str + " needs --teacher");
      }

      const uint64_t seed = mix_seed({cfg.train_seed, kSeedStudent, 0});
      std::vector<Impression> soft_rows;
      CtrModel model;
      OptimizerState opt;
      if (regime_uses_ws(regime)) {
        const Vocabulary grown = expand_vocabulary(teacher->model.vocab, window, data.field_names);
        model = warm_start(teacher->model, grown, seed);
        opt = warm_start_state(model, teacher->model,
                               teacher->opt ? &*teacher->opt : nullptr,
                               cfg.carry_optimizer_state);
      } else {
        model = scratch_start(model_spec_for(cfg),
                              vocab_from(world_field_names(), window, data.field_names), seed);
        opt = make_optimizer_state(model);
      }
      if (regime_uses_kd(regime)) {
        soft_rows = with_soft_targets(teacher->model, window, data.field_names,
                                      cfg.kd.temperature);
        window = ImpressionSpan(soft_rows);
      }
      model.meta.config_hash = pipeline_config_hash(cfg);
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.batch_size;
      tc.epochs = cfg.student_epochs;
      tc.use_kd = regime_uses_kd(regime);
      tc.kd = cfg.kd;
      tc.seed = seed;
      TrainResult tr = train_model(model, opt, data.field_names, window, tc);
      save_checkpoint(model, &opt, out_path);
      std::printf("%s student: %zu examples, loss %.6f -> %.6f, saved %s\n", regime_str.c_str(),
                  tr.access.examples, tr.epoch_mean_loss.front(), tr.epoch_mean_loss.back(),
                  out_path.c_str());
    } else if (*pipeline) {
      PipelineConfig cfg = parse_config_file(config_path);
      PipelineResult res = run_pipeline(cfg, out_path);
      CostReport cost = measure_training_cost(res);
      std::printf("%zu deployments (%zu teachers, %zu students) -> %s\n",
                  res.registry.deployments.size(), cost.n_teachers, cost.n_students,
                  out_path.c_str());
      if (cost.n_students) {
        std::printf("mean samples per training: teacher %.0f, student %.0f (ratio %.2f)\n",
                    cost.teacher_samples_mean, cost.student_samples_mean, cost.sample_ratio);
      }
    } else if (*evaluate_cmd) {
      LoadedCheckpoint ckpt = load_checkpoint(model_path);
      Dataset data = read_dataset(data_path);
      const int64_t t0 = hours_to_s(from_h), t1 = hours_to_s(to_h);
      ImpressionSpan window = slice_window(data, t0, t1);
      ojson out = report_json(evaluate(ckpt.model, data.field_names, window));
      if (!truth_path.empty()) {
        WorldTruth truth = read_truth(truth_path);
        const int64_t ref = ref_h < 0 ? t0 : hours_to_s(ref_h);
        AgeBucketReport buckets = age_bucket_report(ckpt.model, data.field_names, window, truth,
                                                    ref, hours_to_s(threshold_h));
        out["new_bucket"] = bucket_json(buckets.fresh);
        out["old_bucket"] = bucket_json(buckets.stale);
      }
      std::printf("%s\n", out.dump(2).c_str());
    } else if (*compare) {
      std::vector<ojson> records;
      for (const auto& f : metrics_files) {
        for (auto& rec : read_jsonl(f)) records.push_back(std::move(rec));
      }
      ComparisonTable table = compare_regimes(runs_for_compare(records, metric), regime_a,
                                              regime_b);
      std::printf("metric\t%s\nregime_a\t%s\nregime_b\t%s\n", metric.c_str(), regime_a.c_str(),
                  regime_b.c_str());
      std::printf("seed\tmean_a\tmean_b\tdelta\n");
      for (const auto& row : table.rows) {
        std::printf("%llu\t%.9f\t%.9f\t%+.9f\n", static_cast<unsigned long long>(row.seed),
                    row.mean_a, row.mean_b, row.delta);
      }
      std::printf("mean_delta\t%+.9f\nb_lower\t%zu/%zu\na_lower\t%zu/%zu\n", table.mean_delta,
                  table.b_lower, table.rows.size(), table.a_lower, table.rows.size());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
