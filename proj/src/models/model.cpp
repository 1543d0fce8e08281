#include "vitalcast/models/model.hpp"

#include <cmath>

#include "vitalcast/core/ops.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::models {

Var ParameterStore::add(const std::string& name, Shape shape, std::size_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  Tensor init(std::move(shape));
  for (auto& v : init.storage()) v = rng_.uniform(-bound, bound);
  Var param(std::move(init), true);
  params_.push_back({name, param});
  return param;
}

Var ParameterStore::add_constant(const std::string& name, Shape shape, double fill) {
  Var param(Tensor(std::move(shape), fill), true);
  params_.push_back({name, param});
  return param;
}

Tensor ForecastModel::predict(const Tensor& input) const {
  auto ctx = ForwardContext::evaluation();
  return forward(Var(input), ctx).value();
}

std::vector<Var> ForecastModel::parameter_vars() const {
  std::vector<Var> out;
  for (auto& p : parameters()) out.push_back(p.value);
  return out;
}

void check_input_shape(const Var& input, std::size_t channels) {
  const auto& s = input.shape();
  if (s.size() != 2 || s[1] != channels * kInputSteps) {
    throw ContractError("model input must be [batch, " +
                        std::to_string(channels * kInputSteps) + "], got " +
                        shape_to_string(s));
  }
}

Var PersistenceModel::forward(const Var& input, ForwardContext&) const {
  check_input_shape(input, channels_);
  const std::size_t batch = input.shape()[0];
  const std::size_t width = input.shape()[1];
  std::vector<std::size_t> idx;
  idx.reserve(batch * kHorizon);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < kHorizon; ++h) idx.push_back(b * width + kInputSteps - 1);
  }
  return ops::gather(input, std::move(idx), {batch, kHorizon});
}

std::vector<double> persistence_forecast(const Tensor& window, std::size_t horizon) {
  if (window.size() == 0 || window.rank() == 0) {
    throw ContractError("persistence_forecast: empty input window");
  }
  const double last = window.rank() == 1 ? window[window.size() - 1]
                                         : window.at(0, window.cols() - 1);
  return std::vector<double>(horizon, last);
}

}  // namespace vitalcast::models
