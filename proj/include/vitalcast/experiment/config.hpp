#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "vitalcast/data/vitals.hpp"
#include "vitalcast/losses/dilate.hpp"
#include "vitalcast/models/model.hpp"

namespace vitalcast::experiment {

enum class DataSource { kSynthetic, kCsv, kSine };
enum class LossKind { kMse, kDilate };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::filesystem::path vitals;
  std::filesystem::path diagnoses;
  std::size_t patients = 200;
  std::size_t samples = 8;  // sine source only
  double deterioration = 0.7;
  double noise = 1.0;  // multiplier on the generator's default noise
  std::uint64_t seed = 7;
};

struct ModelConfig {
  std::string kind = "nhits";  // persistence, nbeats, nhits, tft
  std::size_t stacks = 3;
  std::size_t blocks = 1;
  std::size_t width = 256;
  std::size_t theta = 32;
  std::vector<std::size_t> kernels{8, 4, 1};
  std::vector<std::size_t> knots{6, 12, 36};
  std::size_t hidden = 64;
  std::size_t heads = 4;
  double dropout = 0.1;
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::size_t max_steps = 0;  // 0 = no cap
};

struct ExperimentConfig {
  DataConfig data;
  ModelConfig model;
  data::Channel target = data::Channel::kMbp;
  bool covariates = false;
  LossKind loss = LossKind::kMse;
  losses::DilateConfig dilate;
  TrainConfig train;
  std::uint64_t seed = 42;

  std::size_t channels() const { return covariates ? 3 : 1; }
};

/// `key = value` lines, `#` starts a comment. Unknown keys, malformed values
/// and out-of-range numbers throw ConfigError naming the line and key.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text with every key in a fixed order; parse_config inverts it.
std::string to_text(const ExperimentConfig& cfg);

/// Referenced input files must exist. Throws ConfigError naming the path.
void check_inputs(const ExperimentConfig& cfg);

/// Keys whose values change the trained model's meaning (architecture,
/// target, covariates). Returns the keys on which `a` and `b` differ.
std::vector<std::string> model_mismatches(const ExperimentConfig& a, const ExperimentConfig& b);

std::string loss_name(LossKind k);

std::unique_ptr<models::ForecastModel> build_model(const ExperimentConfig& cfg);

}  // namespace vitalcast::experiment
