#include "vitalcast/models/basis.hpp"

#include "vitalcast/core/ops.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::models {

BasisBlock::BasisBlock(ParameterStore& store, const std::string& name, std::size_t channels,
                       std::size_t hidden_width, std::size_t theta_dim, BlockShape shape)
    : channels_(channels), shape_(shape) {
  if (shape.pool_kernel == 0) throw ParameterError("pool kernel must be >= 1");
  if (shape.forecast_knots == 0 || shape.forecast_knots > kHorizon) {
    throw ParameterError("forecast knots must lie in [1, 36], got " +
                         std::to_string(shape.forecast_knots));
  }
  if (hidden_width == 0 || theta_dim == 0 || channels == 0) {
    throw ParameterError("block widths must be positive");
  }
  std::size_t in = channels * pooled_length();
  for (int layer = 1; layer <= 4; ++layer) {
    fc.push_back(LinearLayer::create(store, name + ".fc" + std::to_string(layer), in, hidden_width));
    in = hidden_width;
  }
  theta_b = LinearLayer::create(store, name + ".theta_b", hidden_width, theta_dim);
  theta_f = LinearLayer::create(store, name + ".theta_f", hidden_width, theta_dim);
  basis_b = store.add(name + ".basis_b", {theta_dim, channels * backcast_knots()}, theta_dim);
  basis_f = store.add(name + ".basis_f", {theta_dim, shape.forecast_knots}, theta_dim);
}

std::size_t BasisBlock::pooled_length() const {
  return (kInputSteps + shape_.pool_kernel - 1) / shape_.pool_kernel;
}

// The backcast is resolved at the same rate as the forecast, so a full-rate
// forecast (36 knots) pairs with a full-rate backcast (72 knots).
std::size_t BasisBlock::backcast_knots() const {
  return shape_.forecast_knots * kInputSteps / kHorizon;
}

BasisBlock::Output BasisBlock::forward(const Var& lookback) const {
  check_input_shape(lookback, channels_);
  const std::size_t batch = lookback.shape()[0];

  // Pool each channel separately: [batch, C*72] -> [batch*C, 72] -> [batch, C*P].
  Var pooled = lookback;
  if (shape_.pool_kernel > 1) {
    pooled = ops::reshape(
        ops::max_pool_1d(ops::reshape(lookback, {batch * channels_, kInputSteps}),
                         shape_.pool_kernel),
        {batch, channels_ * pooled_length()});
  }

  Var h = pooled;
  for (const auto& layer : fc) h = ops::relu(layer(h));

  Output out;
  out.theta_backward = theta_b(h);
  out.theta_forward = theta_f(h);
  Var coarse_forecast = ops::matmul(out.theta_forward, basis_f);
  Var coarse_backcast = ops::matmul(out.theta_backward, basis_b);
  out.forecast = ops::interpolate_linear(coarse_forecast, kHorizon);
  const std::size_t knots = backcast_knots();
  out.backcast = ops::reshape(
      ops::interpolate_linear(ops::reshape(coarse_backcast, {batch * channels_, knots}),
                              kInputSteps),
      {batch, channels_ * kInputSteps});
  return out;
}

ResidualTrace DoublyResidualModel::trace(const Var& input) const {
  check_input_shape(input, channels_);
  ResidualTrace t;
  Var residual = input;
  for (const auto& block : blocks_) {
    auto out = block.forward(residual);
    t.block_inputs.push_back(residual);
    t.block_backcasts.push_back(out.backcast);
    t.block_forecasts.push_back(out.forecast);
    t.forecast = t.forecast ? ops::add(t.forecast, out.forecast) : out.forecast;
    residual = ops::sub(residual, out.backcast);
  }
  return t;
}

Var DoublyResidualModel::forward(const Var& input, ForwardContext&) const {
  return trace(input).forecast;
}

NBeatsModel::NBeatsModel(const NBeatsConfig& cfg, std::uint64_t seed)
    : DoublyResidualModel(seed, cfg.channels), cfg_(cfg) {
  if (cfg.n_stacks == 0 || cfg.blocks_per_stack == 0) {
    throw ParameterError("N-BEATS needs at least one stack and one block per stack");
  }
  for (std::size_t s = 0; s < cfg.n_stacks; ++s) {
    for (std::size_t b = 0; b < cfg.blocks_per_stack; ++b) {
      blocks_.emplace_back(store_, "stack" + std::to_string(s) + ".block" + std::to_string(b),
                           cfg.channels, cfg.hidden_width, cfg.theta_dim, BlockShape{});
    }
  }
}

NHitsModel::NHitsModel(const NHitsConfig& cfg, std::uint64_t seed)
    : DoublyResidualModel(seed, cfg.channels), cfg_(cfg) {
  if (cfg.pool_kernels.empty() || cfg.pool_kernels.size() != cfg.forecast_knots.size()) {
    throw ParameterError("N-HiTS needs one pool kernel and one knot count per stack");
  }
  if (cfg.blocks_per_stack == 0) throw ParameterError("N-HiTS needs at least one block per stack");
  for (std::size_t s = 0; s < cfg.pool_kernels.size(); ++s) {
    for (std::size_t b = 0; b < cfg.blocks_per_stack; ++b) {
      blocks_.emplace_back(store_, "stack" + std::to_string(s) + ".block" + std::to_string(b),
                           cfg.channels, cfg.hidden_width, cfg.theta_dim,
                           BlockShape{cfg.pool_kernels[s], cfg.forecast_knots[s]});
    }
  }
}

}  // namespace vitalcast::models
