#include "vitalcast/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vitalcast/core/random.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::data {

std::vector<Channel> input_channels(Channel target, bool with_covariates) {
  std::vector<Channel> out{target};
  if (!with_covariates) return out;
  for (Channel c : {Channel::kHr, Channel::kMbp, Channel::kRr}) {
    if (c != target) out.push_back(c);
  }
  return out;
}

namespace {

WindowSample window_at(const PatientGroup& group, Channel target, bool with_covariates,
                       std::size_t start) {
  WindowSample w;
  w.target_channel = target;
  w.group_id = group.group_id;
  const auto rows = input_channels(target, with_covariates);
  w.covariate_channels.assign(rows.begin() + 1, rows.end());
  w.input = Tensor({rows.size(), kInputSteps});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto series = group.channel(rows[r]);
    for (std::size_t t = 0; t < kInputSteps; ++t) w.input.at(r, t) = series[start + t];
  }
  const auto series = group.channel(target);
  w.target.assign(series.begin() + static_cast<std::ptrdiff_t>(start + kInputSteps),
                  series.begin() + static_cast<std::ptrdiff_t>(start + kInputSteps + kHorizon));
  return w;
}

void check_group(const PatientGroup& group) {
  if (group.channels.rank() != 2 || group.channels.rows() != kChannelCount) {
    throw ContractError("group " + group.group_id + " must have 3 channels, got " +
                        shape_to_string(group.channels.shape()));
  }
}

}  // namespace

WindowSample make_window(const PatientGroup& group, Channel target, bool with_covariates) {
  check_group(group);
  if (group.channels.cols() != kInputSteps + kHorizon) {
    throw ContractError("group " + group.group_id + " has " +
                        std::to_string(group.channels.cols()) + " steps, expected 108");
  }
  return window_at(group, target, with_covariates, 0);
}

std::vector<WindowSample> make_windows(const PatientGroup& group, Channel target,
                                       bool with_covariates, std::size_t stride) {
  if (stride == 0) return {make_window(group, target, with_covariates)};
  check_group(group);
  const std::size_t span = kInputSteps + kHorizon;
  if (group.channels.cols() < span) {
    throw ContractError("group " + group.group_id + " is shorter than 108 steps");
  }
  std::vector<WindowSample> out;
  for (std::size_t start = 0; start + span <= group.channels.cols(); start += stride) {
    out.push_back(window_at(group, target, with_covariates, start));
  }
  return out;
}

std::vector<WindowSample> make_windows(std::span<const PatientGroup> groups, Channel target,
                                       bool with_covariates) {
  std::vector<WindowSample> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(make_window(g, target, with_covariates));
  return out;
}

DatasetSplit split_dataset(const std::vector<PatientGroup>& groups, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < groups.size(); ++i) by_patient[groups[i].patient_id].push_back(i);
  if (by_patient.size() < 3) {
    throw DataError("split needs at least 3 patients, got " + std::to_string(by_patient.size()));
  }

  std::vector<const std::vector<std::size_t>*> patients;
  for (const auto& [id, members] : by_patient) patients.push_back(&members);
  Rng rng(seed);
  for (std::size_t i = patients.size() - 1; i > 0; --i) {
    std::swap(patients[i], patients[rng.below(i + 1)]);
  }

  const auto total = static_cast<double>(groups.size());
  const auto share = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * total)));
  DatasetSplit out;
  std::size_t remaining = patients.size();
  for (const auto* members : patients) {
    --remaining;
    std::vector<PatientGroup>* dest = &out.train;
    if (out.test.size() < share && remaining >= 2) {
      dest = &out.test;
    } else if (out.validation.size() < share && remaining >= 1) {
      dest = &out.validation;
    }
    for (std::size_t i : *members) dest->push_back(groups[i]);
  }
  return out;
}

Batch make_batch(std::span<const WindowSample> samples, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("empty batch");
  const std::size_t width = samples[indices[0]].input.size();
  Batch b{Tensor({indices.size(), width}), Tensor({indices.size(), kHorizon})};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& s = samples[indices[r]];
    if (s.input.size() != width || s.target.size() != kHorizon) {
      throw DimensionError("inconsistent window shapes in batch");
    }
    std::copy(s.input.data().begin(), s.input.data().end(),
              b.inputs.storage().begin() + static_cast<std::ptrdiff_t>(r * width));
    std::copy(s.target.begin(), s.target.end(),
              b.targets.storage().begin() + static_cast<std::ptrdiff_t>(r * kHorizon));
  }
  return b;
}

Batch make_batch(std::span<const WindowSample> samples) {
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_batch(samples, all);
}

}  // namespace vitalcast::data
