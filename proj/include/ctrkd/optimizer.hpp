#pragma once
// Adagrad with one global learning rate. Accumulators mirror model parameters
// block by block and are monotonically non-decreasing.

#include <cmath>
#include <string>

#include "ctrkd/error.hpp"
#include "ctrkd/model.hpp"

namespace ctrkd {

constexpr double kAdagradEpsilon = 1e-8;

struct OptimizerState {
  double epsilon = kAdagradEpsilon;
  ParamSet acc;  // sum of squared gradients per parameter
};

inline OptimizerState make_optimizer_state(const CtrModel& m, double epsilon = kAdagradEpsilon) {
  return OptimizerState{epsilon, zeros_like(m)};
}

// acc += g^2; theta -= lr * g / (sqrt(acc) + epsilon).
// Rejects non-finite gradients with the offending block named.
inline void apply_gradients(CtrModel& m, OptimizerState& opt, Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  auto model_refs = param_blocks(m);
  auto acc_refs = set_blocks(m, opt.acc);
  auto grad_refs = set_blocks(m, grads);
  for (size_t b = 0; b < model_refs.size(); ++b) {
    auto& theta = *model_refs[b].data;
    auto& acc = *acc_refs[b];
    auto& g = *grad_refs[b];
    if (theta.size() != g.size() || theta.size() != acc.size()) {
      throw ShapeError("gradient shape mismatch in block " + model_refs[b].label);
    }
    for (size_t i = 0; i < theta.size(); ++i) {
      const double gi = g[i];
      if (!std::isfinite(gi)) {
        throw NumericError("non-finite gradient in block " + model_refs[b].label +
                           " at offset " + std::to_string(i));
      }
      if (gi == 0.0) continue;
      acc[i] += gi * gi;
      theta[i] -= lr * gi / (std::sqrt(acc[i]) + opt.epsilon);
    }
  }
  m.meta.step += 1;
}

}  // namespace ctrkd
