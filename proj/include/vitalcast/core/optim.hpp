#pragma once

#include <cstdint>
#include <vector>

#include "vitalcast/core/autograd.hpp"

namespace vitalcast {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for a fixed list of parameters.
struct OptimizerState {
  std::int64_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  AdamOptions options;
};

OptimizerState make_adam_state(const std::vector<Var>& params, AdamOptions options = {});

/// One bias-corrected adaptive-moment update. `grads[i]` pairs with `params[i]`.
void adam_step(std::vector<Var>& params, const std::vector<Tensor>& grads,
               OptimizerState& state);

/// Same update, taking gradients from each parameter's accumulated `grad()`.
void adam_step(std::vector<Var>& params, OptimizerState& state);

}  // namespace vitalcast
