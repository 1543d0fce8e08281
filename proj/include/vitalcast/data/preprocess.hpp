#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vitalcast/core/tensor.hpp"
#include "vitalcast/data/vitals.hpp"

namespace vitalcast::data {

inline constexpr std::size_t kGroupSteps = 108;
inline constexpr std::int64_t kStepMinutes = 5;

enum class ExclusionReason { kGapTooLong, kLowVariance, kLeadingMissing, kSbpBelowDbp };

/// Machine-readable code: gap-too-long, low-variance, leading-missing, sbp<dbp.
std::string_view reason_code(ExclusionReason r);

struct Exclusion {
  std::string group_id;
  ExclusionReason reason;
};

/// One line per exclusion, `group_id,reason_code`.
std::string format_exclusion_log(const std::vector<Exclusion>& log);

/// A 9-hour segment at 5-minute resolution ending at the diagnosis offset.
/// `channels` is [3 x 108] ordered (HR, MBP, RR).
struct PatientGroup {
  std::string patient_id;
  std::string group_id;
  Tensor channels;
  std::int64_t diagnosis_offset_min = 0;

  std::span<const double> channel(Channel c) const;
};

/// dbp + (sbp - dbp) / 3. Throws DataError when sbp < dbp or dbp < 0.
double derive_mbp(double sbp, double dbp);

struct ImputeResult {
  std::vector<double> values;
  std::optional<ExclusionReason> excluded;
};

/// Fills each missing run with the last observed value. A run longer than
/// `max_gap_min` minutes excludes the series, as does a missing first value.
ImputeResult impute_forward_fill(std::span<const std::optional<double>> series,
                                 std::int64_t max_gap_min = 25,
                                 std::int64_t step_min = kStepMinutes);

/// Centered 5-point moving average; edge points average what is available.
std::vector<double> low_pass_filter(std::span<const double> series);

struct ChannelRange {
  double min = 0.0;
  double max = 1.0;
};

struct ScalingSpec {
  std::array<ChannelRange, kChannelCount> ranges{{{0.0, 300.0}, {0.0, 190.0}, {0.0, 100.0}}};

  const ChannelRange& operator[](Channel c) const { return ranges[static_cast<std::size_t>(c)]; }
};

/// (value - min) / (max - min), clamped to [0, 1]. `clamped` reports whether
/// the value was outside the range.
double scale(double value, Channel c, const ScalingSpec& spec, bool* clamped = nullptr);
double unscale(double scaled, Channel c, const ScalingSpec& spec);

double sample_std(std::span<const double> values);

struct ScreenResult {
  std::vector<PatientGroup> retained;
  std::vector<Exclusion> excluded;
};

/// Drops groups where any channel's sample standard deviation is strictly
/// below `threshold`.
ScreenResult exclude_low_variance(std::vector<PatientGroup> groups, double threshold = 0.0025);

struct PipelineOptions {
  std::int64_t max_gap_min = 25;
  double std_threshold = 0.0025;
  ScalingSpec scaling;
};

struct PipelineResult {
  std::vector<PatientGroup> groups;  // scaled to [0, 1]
  std::vector<Exclusion> exclusions;
  std::vector<std::string> warnings;
};

/// Builds gridded physical-unit groups from raw rows (nearest-slot snapping,
/// MBP derivation, forward fill), then filters, scales and screens them.
PipelineResult run_pipeline(const std::vector<RawVitalRecord>& records,
                            const std::vector<DiagnosisRecord>& diagnoses,
                            const PipelineOptions& options = {});

/// Filter, scale and variance screen for groups already on the 108-step grid
/// in physical units.
PipelineResult finalize_groups(std::vector<PatientGroup> physical,
                               const PipelineOptions& options = {});

}  // namespace vitalcast::data
