#include "vitalcast/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "vitalcast/core/random.hpp"

namespace vitalcast::data {

double SyntheticProfile::value(Channel c, std::size_t step) const {
  const auto i = static_cast<std::size_t>(c);
  const double t = static_cast<double>(step);
  double v = baseline[i] + trend[i] * t +
             amplitude[i] * std::sin(2.0 * std::numbers::pi * t / period + phase);
  if (deteriorating && t > onset) {
    v += ramp[i] * (t - onset) / (static_cast<double>(kGroupSteps - 1) - onset);
  }
  return v;
}

namespace {

constexpr double kLast = static_cast<double>(kGroupSteps - 1);

SyntheticProfile draw_profile(Rng& rng, double deterioration_fraction) {
  SyntheticProfile p;
  p.baseline = {rng.uniform(70.0, 110.0), rng.uniform(65.0, 95.0), rng.uniform(14.0, 22.0)};
  p.trend = {rng.uniform(-3.0, 3.0) / kLast, rng.uniform(-3.0, 3.0) / kLast,
             rng.uniform(-1.5, 1.5) / kLast};
  p.amplitude = {rng.uniform(2.0, 6.0), rng.uniform(1.0, 4.0), rng.uniform(0.5, 2.0)};
  p.period = rng.uniform(24.0, 72.0);
  p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  p.ramp = {rng.uniform(15.0, 35.0), -rng.uniform(15.0, 30.0), rng.uniform(3.0, 8.0)};
  p.onset = rng.uniform(30.0, 70.0);
  p.deteriorating = rng.uniform() < deterioration_fraction;
  return p;
}

}  // namespace

std::vector<SyntheticProfile> synthetic_profiles(std::size_t n_patients, std::uint64_t seed,
                                                const SyntheticConfig& config) {
  Rng rng(seed);
  std::vector<SyntheticProfile> out;
  for (std::size_t i = 0; i < n_patients * config.groups_per_patient; ++i) {
    out.push_back(draw_profile(rng, config.deterioration_fraction));
  }
  return out;
}

std::vector<PatientGroup> generate_synthetic(std::size_t n_patients, std::uint64_t seed,
                                             const SyntheticConfig& config) {
  const auto profiles = synthetic_profiles(n_patients, seed, config);
  // Separate stream so noise settings never shift the profile draws.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const ScalingSpec ranges;
  std::vector<PatientGroup> out;
  for (std::size_t p = 0; p < n_patients; ++p) {
    char patient[32];
    std::snprintf(patient, sizeof patient, "p%04zu", p + 1);
    std::int64_t offset = 5 * static_cast<std::int64_t>(120 + rng.below(480));
    for (std::size_t g = 0; g < config.groups_per_patient; ++g) {
      const auto& profile = profiles[p * config.groups_per_patient + g];
      PatientGroup group{patient, std::string(patient) + "-g" + std::to_string(g + 1),
                         Tensor({kChannelCount, kGroupSteps}), offset};
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        const auto channel = static_cast<Channel>(c);
        for (std::size_t t = 0; t < kGroupSteps; ++t) {
          const double noise = config.noise_sd[c] == 0.0 ? 0.0 : config.noise_sd[c] * rng.normal();
          group.channels.at(c, t) = std::clamp(profile.value(channel, t) + noise,
                                               ranges[channel].min, ranges[channel].max);
        }
      }
      out.push_back(std::move(group));
      offset += 5 * static_cast<std::int64_t>(kGroupSteps + rng.below(288));
    }
  }
  return out;
}

RawExport to_raw_records(const std::vector<PatientGroup>& physical) {
  constexpr double kPulsePressure = 40.0;
  RawExport out;
  for (const auto& g : physical) {
    const auto hr = g.channel(Channel::kHr);
    const auto mbp = g.channel(Channel::kMbp);
    const auto rr = g.channel(Channel::kRr);
    double tail = 0.0;
    for (std::size_t t = 0; t < kGroupSteps; ++t) {
      const std::int64_t offset =
          g.diagnosis_offset_min - kStepMinutes * static_cast<std::int64_t>(kGroupSteps - 1 - t);
      const double dbp = mbp[t] - kPulsePressure / 3.0;
      out.vitals.push_back({g.patient_id, offset, hr[t], dbp + kPulsePressure, dbp, rr[t]});
      if (t + 12 >= kGroupSteps) tail += mbp[t] / 12.0;
    }
    out.diagnoses.push_back({g.patient_id, g.group_id, g.diagnosis_offset_min,
                             tail < 65.0 ? DiagnosisLabel::kSepticShock : DiagnosisLabel::kSepsis});
  }
  std::stable_sort(out.vitals.begin(), out.vitals.end(), [](const auto& a, const auto& b) {
    return std::tie(a.patient_id, a.offset_min) < std::tie(b.patient_id, b.offset_min);
  });
  return out;
}

}  // namespace vitalcast::data
