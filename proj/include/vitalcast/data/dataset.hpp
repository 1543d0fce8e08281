#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vitalcast/data/preprocess.hpp"

namespace vitalcast::data {

inline constexpr std::size_t kInputSteps = 72;
inline constexpr std::size_t kHorizon = 36;

struct WindowSample {
  Tensor input;                 // [C x 72], target channel in row 0
  std::vector<double> target;   // 36 steps of the target channel
  Channel target_channel = Channel::kMbp;
  std::vector<Channel> covariate_channels;
  std::string group_id;
};

/// Input channel order: target first, then the remaining channels in
/// (HR, MBP, RR) order when `with_covariates`.
std::vector<Channel> input_channels(Channel target, bool with_covariates);

/// Steps 1-72 as input and 73-108 of the target channel as target. Throws
/// ContractError unless the group has exactly 108 steps.
WindowSample make_window(const PatientGroup& group, Channel target, bool with_covariates);

/// Sliding variant for series longer than 108 steps. `stride == 0` keeps the
/// single window at the start.
std::vector<WindowSample> make_windows(const PatientGroup& group, Channel target,
                                       bool with_covariates, std::size_t stride = 0);

std::vector<WindowSample> make_windows(std::span<const PatientGroup> groups, Channel target,
                                       bool with_covariates);

struct DatasetSplit {
  std::vector<PatientGroup> train;
  std::vector<PatientGroup> validation;
  std::vector<PatientGroup> test;
};

/// Shuffles patients with `seed` and assigns whole patients so group counts
/// approximate 80:10:10. Throws DataError with fewer than 3 patients.
DatasetSplit split_dataset(const std::vector<PatientGroup>& groups, std::uint64_t seed);

struct Batch {
  Tensor inputs;   // [B, C * 72]
  Tensor targets;  // [B, 36]
};

Batch make_batch(std::span<const WindowSample> samples, std::span<const std::size_t> indices);
Batch make_batch(std::span<const WindowSample> samples);

}  // namespace vitalcast::data
