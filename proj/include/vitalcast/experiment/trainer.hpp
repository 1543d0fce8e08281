#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vitalcast/data/dataset.hpp"
#include "vitalcast/experiment/config.hpp"

namespace vitalcast::experiment {

struct Datasets {
  std::vector<data::WindowSample> train;
  std::vector<data::WindowSample> validation;
  std::vector<data::WindowSample> test;
  std::vector<data::Exclusion> exclusions;
  std::vector<std::string> warnings;
};

/// Pure sinusoids already in [0, 1], one 108-step group per sample.
std::vector<data::PatientGroup> sine_groups(std::size_t n, std::uint64_t seed);

/// Loads or generates groups per `cfg.data`, splits them by patient with
/// `cfg.seed` and cuts windows for the configured target and covariates. The
/// sine source skips the split: all three sets hold every sample.
Datasets prepare_data(const ExperimentConfig& cfg);

/// Raised when a training or validation loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::size_t steps = 0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;
  double best_validation = 0.0;
  bool stopped_early = false;
};

Var training_loss(const Var& pred, const Tensor& target, const ExperimentConfig& cfg);

/// Evaluation-mode loss over a whole sample set.
double dataset_loss(const models::ForecastModel& model,
                    std::span<const data::WindowSample> samples, const ExperimentConfig& cfg);

/// Mean squared error over a sample set in evaluation mode.
double dataset_mse(const models::ForecastModel& model,
                   std::span<const data::WindowSample> samples);

/// Adam with shuffled minibatches and early stopping on validation loss.
/// Parameters end at the best validation epoch.
TrainResult train_model(const models::ForecastModel& model, const Datasets& data,
                        const ExperimentConfig& cfg,
                        const std::function<void(const EpochLog&)>& on_epoch = {});

/// `epoch,train_loss,validation_loss,steps` rows.
std::string format_train_log(const std::vector<EpochLog>& epochs);

}  // namespace vitalcast::experiment
