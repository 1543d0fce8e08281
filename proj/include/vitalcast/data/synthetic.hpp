#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vitalcast/data/preprocess.hpp"

namespace vitalcast::data {

struct SyntheticConfig {
  std::size_t groups_per_patient = 1;
  /// Per-channel noise standard deviation in physical units (HR, MBP, RR).
  std::array<double, kChannelCount> noise_sd{1.0, 1.0, 0.5};
  /// Probability that a group carries a late deterioration ramp.
  double deterioration_fraction = 0.7;
};

/// Analytic trajectory parameters of one group, per channel (HR, MBP, RR).
struct SyntheticProfile {
  std::array<double, kChannelCount> baseline{};
  std::array<double, kChannelCount> trend{};  // per step
  std::array<double, kChannelCount> amplitude{};
  std::array<double, kChannelCount> ramp{};  // signed change reached at the last step
  double period = 48.0;                       // steps
  double phase = 0.0;
  bool deteriorating = false;
  double onset = 0.0;  // step where the ramp starts

  double value(Channel c, std::size_t step) const;
};

/// Profiles in generation order (patient-major, then group).
std::vector<SyntheticProfile> synthetic_profiles(std::size_t n_patients, std::uint64_t seed,
                                                const SyntheticConfig& config = {});

/// Physical-unit groups: baseline + linear trend + sinusoid + noise, with an
/// optional ramp where MBP falls and HR rises after a random onset.
std::vector<PatientGroup> generate_synthetic(std::size_t n_patients, std::uint64_t seed,
                                             const SyntheticConfig& config = {});

struct RawExport {
  std::vector<RawVitalRecord> vitals;
  std::vector<DiagnosisRecord> diagnoses;
};

/// Raw rows for physical groups, with SBP/DBP split around MBP at a fixed
/// 40 mmHg pulse pressure.
RawExport to_raw_records(const std::vector<PatientGroup>& physical);

}  // namespace vitalcast::data
