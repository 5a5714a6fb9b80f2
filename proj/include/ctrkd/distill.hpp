#pragma once
// Training objective: binary cross entropy on the hard label plus a
// teacher-matching term
//
//   loss(y, z) = CE(y, sigmoid(z)) + alpha * lambda * CE(s, sigmoid(z / T))
//
// where s is the teacher's soft target, T >= 1 the temperature and
// lambda = T^2 when scale_distill_by_t2 is set (1 otherwise). With alpha = 0
// the term vanishes exactly, bit for bit.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "ctrkd/error.hpp"
#include "ctrkd/impression.hpp"
#include "ctrkd/model.hpp"

namespace ctrkd {

struct KdConfig {
  double alpha = 0.5;
  double temperature = 2.0;
  bool scale_distill_by_t2 = false;

  void validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("kd alpha must be >= 0");
    if (!(temperature >= 1.0)) throw ConfigError("kd temperature must be >= 1");
  }

  double lambda() const { return scale_distill_by_t2 ? temperature * temperature : 1.0; }
};

// -(t ln p + (1-t) ln(1-p)). p must already be clamped to
// [kProbClamp, 1 - kProbClamp]; t may be a hard label or a soft target.
inline double binary_ce(double target, double p) {
  if (!(target >= 0.0 && target <= 1.0)) throw ConfigError("CE target outside [0, 1]");
  if (p < kProbClamp || p > 1.0 - kProbClamp) {
    throw ConfigError("CE probability outside clamp bounds");
  }
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

// Temperature-softened probability: logistic(z / T), clamped.
inline double soften(double logit, double temperature) {
  if (!(temperature >= 1.0)) throw ConfigError("temperature must be >= 1");
  return clamp_prob(logistic(logit / temperature));
}

inline double kd_loss(double y, double student_logit, double soft_target, const KdConfig& cfg) {
  cfg.validate();
  const double hard = binary_ce(y, clamp_prob(logistic(student_logit)));
  const double distill =
      binary_ce(soft_target, soften(student_logit, cfg.temperature));
  return hard + cfg.alpha * cfg.lambda() * distill;
}

// d kd_loss / d student_logit, for the unclamped objective. Matches central
// finite differences away from the clamp region.
inline double kd_loss_grad(double y, double student_logit, double soft_target,
                           const KdConfig& cfg) {
  cfg.validate();
  const double hard = logistic(student_logit) - y;
  return hard + cfg.alpha * cfg.lambda() *
                    (logistic(student_logit / cfg.temperature) - soft_target) /
                    cfg.temperature;
}

// Soft targets are stored with 9 decimal digits in dataset files; quantize at
// creation time so write -> read -> write is byte-stable.
inline double canonical_soft_target(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", p);
  return std::strtod(buf, nullptr);
}

// Annotates every impression with the teacher's temperature-softened click
// probability. Impressions containing any value outside the teacher's
// vocabulary receive the teacher's global prior (its stored mean label rate).
// Output order equals input order; the teacher is untouched.
inline std::vector<Impression> with_soft_targets(const CtrModel& teacher, ImpressionSpan rows,
                                                 const std::vector<std::string>& dataset_fields,
                                                 double temperature) {
  if (!(temperature >= 1.0)) throw ConfigError("temperature must be >= 1");
  const ColumnMap cm = make_column_map(teacher.spec, dataset_fields);
  const double prior = clamp_prob(teacher.meta.label_mean);
  Workspace ws;
  ws.resize_for(teacher);
  std::vector<uint32_t> idx(cm.cols.size());

  std::vector<Impression> out(rows.begin(), rows.end());
  for (auto& imp : out) {
    bool oov = false;
    for (size_t f = 0; f < cm.cols.size(); ++f) {
      auto found = teacher.vocab.find(f, imp.features.at(cm.cols[f]));
      if (!found) {
        oov = true;
        break;
      }
      idx[f] = static_cast<uint32_t>(*found);
    }
    const double soft = oov ? prior : soften(forward_one(teacher, idx, ws), temperature);
    imp.soft_target = canonical_soft_target(soft);
  }
  return out;
}

}  // namespace ctrkd
