#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vitalcast/models/model.hpp"

namespace vitalcast::models {

/// Contents of a checkpoint file: the experiment configuration it was trained
/// with, verbatim, and every named parameter tensor.
struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

/// Text format, values stored as hexadecimal floats so a save/load round trip
/// is bit-exact:
///
///   vitalcast-checkpoint 1
///   config <line count>
///   <config lines>
///   tensors <count>
///   tensor <name> <rank> <dim>...
///   <values>
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint snapshot(const ForecastModel& model, std::string config_text);

/// Copies tensors into the model's parameters by name. Throws ContractError
/// when names or shapes disagree.
void restore_parameters(const ForecastModel& model, const Checkpoint& ckpt);

}  // namespace vitalcast::models
