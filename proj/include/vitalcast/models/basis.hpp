#pragma once

#include <string>
#include <vector>

#include "vitalcast/models/layers.hpp"

namespace vitalcast::models {

/// Shape of one doubly-residual block. A pooling kernel of 1 together with
/// `forecast_knots == 36` gives the plain generic N-BEATS block; larger kernels
/// and fewer knots give the multi-rate N-HiTS block.
struct BlockShape {
  std::size_t pool_kernel = 1;
  std::size_t forecast_knots = kHorizon;
};

struct NBeatsConfig {
  std::size_t n_stacks = 3;
  std::size_t blocks_per_stack = 1;
  std::size_t hidden_width = 256;
  std::size_t theta_dim = 32;
  std::size_t channels = 1;
};

struct NHitsConfig {
  std::size_t blocks_per_stack = 1;
  std::size_t hidden_width = 256;
  std::size_t theta_dim = 32;
  std::size_t channels = 1;
  /// One entry per stack.
  std::vector<std::size_t> pool_kernels{8, 4, 1};
  std::vector<std::size_t> forecast_knots{6, 12, 36};
};

/// One block: four ReLU fully connected layers produce h4, two linear heads
/// give backward/forward expansion coefficients, and learned basis matrices
/// turn the coefficients into (coarse) backcast and forecast.
class BasisBlock {
 public:
  BasisBlock(ParameterStore& store, const std::string& name, std::size_t channels,
             std::size_t hidden_width, std::size_t theta_dim, BlockShape shape);

  struct Output {
    Var backcast;  // [batch, channels * 72]
    Var forecast;  // [batch, 36]
    Var theta_backward;
    Var theta_forward;
  };

  Output forward(const Var& lookback) const;

  const BlockShape& shape() const { return shape_; }
  std::size_t pooled_length() const;
  std::size_t backcast_knots() const;

  std::vector<LinearLayer> fc;  // h1..h4
  LinearLayer theta_b;
  LinearLayer theta_f;
  Var basis_b;  // [theta_dim, channels * backcast_knots]
  Var basis_f;  // [theta_dim, forecast_knots]

 private:
  std::size_t channels_;
  BlockShape shape_;
};

/// Intermediate values of a doubly-residual pass, for inspection.
struct ResidualTrace {
  std::vector<Var> block_inputs;
  std::vector<Var> block_backcasts;
  std::vector<Var> block_forecasts;
  Var forecast;
};

/// Stacks of BasisBlocks: block l+1 sees x_l - backcast_l and the model
/// forecast is the sum of every block forecast.
class DoublyResidualModel : public ForecastModel {
 public:
  std::size_t channels() const override { return channels_; }
  Var forward(const Var& input, ForwardContext& ctx) const override;
  std::vector<NamedParameter> parameters() const override { return store_.all(); }

  ResidualTrace trace(const Var& input) const;
  const std::vector<BasisBlock>& blocks() const { return blocks_; }
  std::vector<BasisBlock>& blocks() { return blocks_; }

 protected:
  DoublyResidualModel(std::uint64_t seed, std::size_t channels)
      : store_(seed), channels_(channels) {}

  ParameterStore store_;
  std::size_t channels_;
  std::vector<BasisBlock> blocks_;
};

class NBeatsModel final : public DoublyResidualModel {
 public:
  NBeatsModel(const NBeatsConfig& cfg, std::uint64_t seed);
  std::string kind() const override { return "nbeats"; }
  const NBeatsConfig& config() const { return cfg_; }

 private:
  NBeatsConfig cfg_;
};

class NHitsModel final : public DoublyResidualModel {
 public:
  NHitsModel(const NHitsConfig& cfg, std::uint64_t seed);
  std::string kind() const override { return "nhits"; }
  const NHitsConfig& config() const { return cfg_; }

 private:
  NHitsConfig cfg_;
};

}  // namespace vitalcast::models
