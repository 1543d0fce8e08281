#include "vitalcast/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vitalcast/error.hpp"

namespace vitalcast::data {

std::string_view reason_code(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::kGapTooLong: return "gap-too-long";
    case ExclusionReason::kLowVariance: return "low-variance";
    case ExclusionReason::kLeadingMissing: return "leading-missing";
    case ExclusionReason::kSbpBelowDbp: return "sbp<dbp";
  }
  return "?";
}

std::string format_exclusion_log(const std::vector<Exclusion>& log) {
  std::string out;
  for (const auto& e : log) {
    out += e.group_id;
    out += ',';
    out += reason_code(e.reason);
    out += '\n';
  }
  return out;
}

std::span<const double> PatientGroup::channel(Channel c) const {
  const std::size_t steps = channels.cols();
  return channels.data().subspan(static_cast<std::size_t>(c) * steps, steps);
}

double derive_mbp(double sbp, double dbp) {
  if (sbp < dbp) {
    throw DataError("sbp " + std::to_string(sbp) + " below dbp " + std::to_string(dbp));
  }
  if (dbp < 0.0) throw DataError("negative dbp " + std::to_string(dbp));
  return dbp + (sbp - dbp) / 3.0;
}

ImputeResult impute_forward_fill(std::span<const std::optional<double>> series,
                                 std::int64_t max_gap_min, std::int64_t step_min) {
  if (step_min <= 0) throw ParameterError("step_min must be positive");
  const auto max_run = static_cast<std::size_t>(max_gap_min / step_min);
  ImputeResult out;
  if (series.empty()) return out;
  if (!series.front()) {
    out.excluded = ExclusionReason::kLeadingMissing;
    return out;
  }
  out.values.reserve(series.size());
  std::size_t run = 0;
  for (const auto& v : series) {
    if (v) {
      run = 0;
      out.values.push_back(*v);
      continue;
    }
    if (++run > max_run) {
      out.values.clear();
      out.excluded = ExclusionReason::kGapTooLong;
      return out;
    }
    out.values.push_back(out.values.back());
  }
  return out;
}

std::vector<double> low_pass_filter(std::span<const double> series) {
  constexpr std::ptrdiff_t half = 2;
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  std::vector<double> out(series.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double sum = 0.0;
    for (auto j = lo; j <= hi; ++j) sum += series[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double scale(double value, Channel c, const ScalingSpec& spec, bool* clamped) {
  const auto& r = spec[c];
  if (!(r.max > r.min)) throw ParameterError("scaling range needs max > min");
  const bool outside = value < r.min || value > r.max;
  if (clamped != nullptr) *clamped = outside;
  return (std::clamp(value, r.min, r.max) - r.min) / (r.max - r.min);
}

double unscale(double scaled, Channel c, const ScalingSpec& spec) {
  const auto& r = spec[c];
  return r.min + scaled * (r.max - r.min);
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ScreenResult exclude_low_variance(std::vector<PatientGroup> groups, double threshold) {
  ScreenResult out;
  for (auto& g : groups) {
    bool flat = false;
    for (std::size_t c = 0; c < g.channels.rows(); ++c) {
      flat |= sample_std(g.channel(static_cast<Channel>(c))) < threshold;
    }
    if (flat) {
      out.excluded.push_back({g.group_id, ExclusionReason::kLowVariance});
    } else {
      out.retained.push_back(std::move(g));
    }
  }
  return out;
}

PipelineResult finalize_groups(std::vector<PatientGroup> physical,
                               const PipelineOptions& options) {
  PipelineResult out;
  for (auto& g : physical) {
    if (g.channels.rank() != 2 || g.channels.rows() != kChannelCount ||
        g.channels.cols() != kGroupSteps) {
      throw ContractError("group " + g.group_id + " must be [3 x 108], got " +
                          shape_to_string(g.channels.shape()));
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto channel = static_cast<Channel>(c);
      const auto smooth = low_pass_filter(g.channel(channel));
      std::size_t clamped = 0;
      for (std::size_t t = 0; t < kGroupSteps; ++t) {
        bool outside = false;
        g.channels.at(c, t) = scale(smooth[t], channel, options.scaling, &outside);
        clamped += outside ? 1 : 0;
      }
      if (clamped > 0) {
        const auto& r = options.scaling[channel];
        out.warnings.push_back("group " + g.group_id + ": " + std::to_string(clamped) + " " +
                               std::string(channel_name(channel)) + " values clamped to [" +
                               std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
      }
    }
  }
  auto screened = exclude_low_variance(std::move(physical), options.std_threshold);
  out.groups = std::move(screened.retained);
  out.exclusions = std::move(screened.excluded);
  return out;
}

namespace {

// Per-slot candidate: value plus distance in minutes to the slot time.
struct Slot {
  std::optional<double> value;
  std::int64_t distance = 0;
};

void offer(Slot& slot, std::optional<double> v, std::int64_t distance) {
  if (!v) return;
  if (!slot.value || distance < slot.distance) slot = {v, distance};
}

}  // namespace

PipelineResult run_pipeline(const std::vector<RawVitalRecord>& records,
                            const std::vector<DiagnosisRecord>& diagnoses,
                            const PipelineOptions& options) {
  std::vector<PatientGroup> physical;
  std::vector<Exclusion> early;
  std::set<std::string> seen;
  const auto span_min = static_cast<std::int64_t>(kGroupSteps - 1) * kStepMinutes;

  for (const auto& d : diagnoses) {
    if (!seen.insert(d.group_id).second) throw DataError("duplicate group_id " + d.group_id);
    const std::int64_t start = d.diagnosis_offset_min - span_min;
    const auto lo = std::lower_bound(records.begin(), records.end(), d.patient_id,
                                     [](const RawVitalRecord& r, const std::string& id) {
                                       return r.patient_id < id;
                                     });
    std::array<std::array<Slot, kGroupSteps>, kChannelCount> slots{};
    bool inconsistent = false;
    for (auto it = lo; it != records.end() && it->patient_id == d.patient_id; ++it) {
      const std::int64_t rel = it->offset_min - start;
      const std::int64_t half = kStepMinutes / 2;
      if (rel < -half || rel > span_min + half) continue;
      const std::int64_t slot =
          std::min<std::int64_t>((rel + half) / kStepMinutes, kGroupSteps - 1);
      const std::int64_t distance = std::abs(rel - slot * kStepMinutes);
      const auto s = static_cast<std::size_t>(slot);
      std::optional<double> mbp;
      if (it->sbp && it->dbp) {
        if (*it->sbp < *it->dbp) {
          inconsistent = true;
          break;
        }
        mbp = derive_mbp(*it->sbp, *it->dbp);
      }
      offer(slots[0][s], it->hr, distance);
      offer(slots[1][s], mbp, distance);
      offer(slots[2][s], it->rr, distance);
    }
    if (inconsistent) {
      early.push_back({d.group_id, ExclusionReason::kSbpBelowDbp});
      continue;
    }

    PatientGroup g{d.patient_id, d.group_id, Tensor({kChannelCount, kGroupSteps}),
                   d.diagnosis_offset_min};
    std::optional<ExclusionReason> reason;
    for (std::size_t c = 0; c < kChannelCount && !reason; ++c) {
      std::vector<std::optional<double>> series(kGroupSteps);
      for (std::size_t t = 0; t < kGroupSteps; ++t) series[t] = slots[c][t].value;
      const auto filled = impute_forward_fill(series, options.max_gap_min);
      reason = filled.excluded;
      if (reason) break;
      for (std::size_t t = 0; t < kGroupSteps; ++t) g.channels.at(c, t) = filled.values[t];
    }
    if (reason) {
      early.push_back({d.group_id, *reason});
      continue;
    }
    physical.push_back(std::move(g));
  }

  auto out = finalize_groups(std::move(physical), options);
  early.insert(early.end(), out.exclusions.begin(), out.exclusions.end());
  out.exclusions = std::move(early);
  return out;
}

}  // namespace vitalcast::data
