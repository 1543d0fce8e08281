#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vitalcast/core/autograd.hpp"
#include "vitalcast/core/random.hpp"

namespace vitalcast::models {

inline constexpr std::size_t kInputSteps = 72;
inline constexpr std::size_t kHorizon = 36;

struct NamedParameter {
  std::string name;
  Var value;
};

/// Ordered collection of trainable tensors, initialized uniformly in
/// +-sqrt(1 / fan_in) from a seeded generator.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed) : rng_(seed) {}

  Var add(const std::string& name, Shape shape, std::size_t fan_in);
  Var add_constant(const std::string& name, Shape shape, double fill);

  const std::vector<NamedParameter>& all() const { return params_; }

 private:
  Rng rng_;
  std::vector<NamedParameter> params_;
};

/// Per-call forward settings. Dropout seeds are drawn from `rng` in a fixed
/// order so training runs are reproducible.
class ForwardContext {
 public:
  static ForwardContext evaluation() { return ForwardContext(false, 0); }
  static ForwardContext training(std::uint64_t seed) { return ForwardContext(true, seed); }

  bool is_training() const { return training_; }
  std::uint64_t next_seed() { return rng_.next(); }

 private:
  ForwardContext(bool training, std::uint64_t seed) : training_(training), rng_(seed) {}
  bool training_;
  Rng rng_;
};

/// Maps a batch of flattened windows [batch, channels * 72] (channel-major,
/// target channel first) to forecasts [batch, 36].
class ForecastModel {
 public:
  virtual ~ForecastModel() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t channels() const = 0;
  virtual Var forward(const Var& input, ForwardContext& ctx) const = 0;
  virtual std::vector<NamedParameter> parameters() const = 0;

  /// Evaluation-mode forward on plain values.
  Tensor predict(const Tensor& input) const;
  std::vector<Var> parameter_vars() const;
};

/// Repeats the last observed target value over the horizon.
class PersistenceModel final : public ForecastModel {
 public:
  explicit PersistenceModel(std::size_t channels = 1) : channels_(channels) {}

  std::string kind() const override { return "persistence"; }
  std::size_t channels() const override { return channels_; }
  Var forward(const Var& input, ForwardContext& ctx) const override;
  std::vector<NamedParameter> parameters() const override { return {}; }

 private:
  std::size_t channels_;
};

/// Persistence forecast for a single window given as [channels x 72] rows,
/// target first. Throws ContractError on an empty input.
std::vector<double> persistence_forecast(const Tensor& window, std::size_t horizon = kHorizon);

void check_input_shape(const Var& input, std::size_t channels);

}  // namespace vitalcast::models
