#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vitalcast/data/dataset.hpp"
#include "vitalcast/models/model.hpp"

namespace vitalcast::eval {

/// Minimal accumulated squared-difference cost over monotone alignments with
/// steps down, right and diagonal. Throws ContractError on empty input.
double hard_dtw(std::span<const double> a, std::span<const double> b);

/// Identifies one Table-1 cell group. `loss` is "mse", "dilate", or empty for
/// models that are not trained.
struct EvalKey {
  std::string model;
  data::Channel target = data::Channel::kMbp;
  bool covariates = false;
  std::string loss;

  std::string label() const;
};

struct EvalReport {
  EvalKey key;
  double mse = 0.0;
  double mse_scaled = 0.0;  // mse * 1e4
  double dtw = 0.0;
  std::vector<double> horizon_curve;  // 36 entries, h = 1..36
  std::size_t n_samples = 0;
};

inline constexpr double kMseDisplayScale = 1e4;

/// Metrics from precomputed forecasts and targets, both [N, 36] in scaled
/// units. Throws DataError when N is zero.
EvalReport evaluate_forecasts(const Tensor& forecasts, const Tensor& targets, EvalKey key = {});

/// Runs `model` in evaluation mode over `samples`, then scores it.
EvalReport evaluate_model(const models::ForecastModel& model,
                          std::span<const data::WindowSample> samples, EvalKey key = {});

/// Mean over samples of hard_dtw(forecast[1..h], truth[1..h]) for h = 1..36.
std::vector<double> horizon_curve(const Tensor& forecasts, const Tensor& targets);
std::vector<double> horizon_sweep(const models::ForecastModel& model,
                                  std::span<const data::WindowSample> samples);

/// First 1-based horizon where `model` is strictly below `baseline`.
std::optional<std::size_t> crossover(std::span<const double> model,
                                     std::span<const double> baseline);

struct CrossoverSummary {
  std::string label;
  std::optional<std::size_t> first_horizon;
};

std::vector<CrossoverSummary> compare_to_persistence(const std::vector<EvalReport>& reports,
                                                     const EvalReport& persistence);

/// "h=N" or "never".
std::string describe(const CrossoverSummary& s);

std::string metrics_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> parse_metrics_json(const std::string& text);
/// Rows `horizon_step,model,dtw`, one per model and step.
std::string horizon_curve_csv(const std::vector<EvalReport>& reports);

}  // namespace vitalcast::eval
