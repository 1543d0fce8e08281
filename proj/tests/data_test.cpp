#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "vitalcast/core/random.hpp"
#include "vitalcast/data/dataset.hpp"
#include "vitalcast/data/synthetic.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::data {
namespace {

std::vector<RawVitalRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return ingest_csv(in, "vitals.csv");
}

TEST(Ingest, ParsesAndSortsRows) {
  const auto rows = parse(
      "patient_id,offset_min,hr,sbp,dbp,rr\n"
      "b,10,80,120,80,16\n"
      "a,15,81,,79,\n"
      "a,5,82,118,78,15\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].patient_id, "a");
  EXPECT_EQ(rows[0].offset_min, 5);
  EXPECT_EQ(rows[1].offset_min, 15);
  EXPECT_FALSE(rows[1].sbp.has_value());
  EXPECT_FALSE(rows[1].rr.has_value());
  EXPECT_EQ(*rows[1].dbp, 79.0);
  EXPECT_EQ(rows[2].patient_id, "b");
}

TEST(Ingest, TwoRowFile) {
  const auto rows = parse("patient_id,offset_min,hr,sbp,dbp,rr\nx,5,80,120,80,16\nx,0,81,121,81,17\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].offset_min, 0);
  EXPECT_EQ(*rows[0].hr, 81.0);
}

TEST(Ingest, NonNumericCellNamesLine) {
  try {
    parse("patient_id,offset_min,hr,sbp,dbp,rr\nx,0,80,120,80,16\nx,5,abc,120,80,16\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(":3:"), std::string::npos) << what;
    EXPECT_NE(what.find("hr"), std::string::npos) << what;
  }
}

TEST(Ingest, BadHeaderListsExpectedColumns) {
  try {
    parse("patient,offset,hr\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(kVitalsHeader), std::string::npos);
  }
  EXPECT_THROW(parse("patient_id,offset_min,hr,sbp,dbp,rr\nx,0,80\n"), DataError);
  EXPECT_THROW(parse("patient_id,offset_min,hr,sbp,dbp,rr\nx,0,80,,,\nx,0,81,,,\n"), DataError);
  EXPECT_THROW(ingest_csv(std::filesystem::path("/nonexistent/vitals.csv")), DataError);
}

TEST(Ingest, Diagnoses) {
  std::istringstream good(
      "patient_id,group_id,diagnosis_offset_min,label\np,g1,600,sepsis\np,g2,900,septic_shock\n");
  const auto d = ingest_diagnoses(good, "dx.csv");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].label, DiagnosisLabel::kSepticShock);
  std::istringstream bad("patient_id,group_id,diagnosis_offset_min,label\np,g1,600,flu\n");
  EXPECT_THROW(ingest_diagnoses(bad, "dx.csv"), DataError);
}

TEST(DeriveMbp, Examples) {
  EXPECT_DOUBLE_EQ(derive_mbp(120, 80), 80.0 + 40.0 / 3.0);
  EXPECT_EQ(derive_mbp(100, 100), 100.0);
  EXPECT_EQ(derive_mbp(130, 70), 90.0);
  EXPECT_THROW(derive_mbp(70, 80), DataError);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double dbp = rng.uniform(20, 120);
    const double sbp = dbp + rng.uniform(0, 100);
    EXPECT_EQ(derive_mbp(sbp, dbp), dbp + (sbp - dbp) / 3.0);
  }
}

using Series = std::vector<std::optional<double>>;
constexpr std::nullopt_t kMiss = std::nullopt;

TEST(Impute, Examples) {
  const auto filled = impute_forward_fill(Series{1.0, kMiss, kMiss, 2.0});
  EXPECT_FALSE(filled.excluded);
  EXPECT_EQ(filled.values, (std::vector<double>{1, 1, 1, 2}));

  Series five{3.0, kMiss, kMiss, kMiss, kMiss, kMiss, 4.0};
  const auto kept = impute_forward_fill(five);
  EXPECT_FALSE(kept.excluded);
  EXPECT_EQ(kept.values, (std::vector<double>{3, 3, 3, 3, 3, 3, 4}));

  Series six{3.0, kMiss, kMiss, kMiss, kMiss, kMiss, kMiss, 4.0};
  EXPECT_EQ(impute_forward_fill(six).excluded, ExclusionReason::kGapTooLong);
  six.pop_back();
  EXPECT_EQ(impute_forward_fill(six).excluded, ExclusionReason::kGapTooLong);

  EXPECT_EQ(impute_forward_fill(Series{kMiss, 1.0}).excluded, ExclusionReason::kLeadingMissing);
}

// Reference: longest missing run by scanning backwards from each gap.
TEST(Impute, MatchesReferenceOnRandomSeries) {
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    Series s(108);
    for (auto& v : s) {
      if (rng.uniform() > 0.35) v = rng.uniform(0, 100);
    }
    const auto got = impute_forward_fill(s);
    if (!s[0]) {
      EXPECT_EQ(got.excluded, ExclusionReason::kLeadingMissing);
      continue;
    }
    std::size_t longest = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::size_t back = 0;
      while (back <= i && !s[i - back]) ++back;
      longest = std::max(longest, back);
    }
    if (longest > 5) {
      EXPECT_EQ(got.excluded, ExclusionReason::kGapTooLong);
      continue;
    }
    ASSERT_FALSE(got.excluded);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::size_t j = i;
      while (!s[j]) --j;
      EXPECT_EQ(got.values[i], *s[j]);
    }
  }
}

TEST(LowPass, Examples) {
  const std::vector<double> constant(108, 4.25);
  EXPECT_EQ(low_pass_filter(constant), constant);

  const auto spike = low_pass_filter(std::vector<double>{0, 0, 10, 0, 0});
  EXPECT_DOUBLE_EQ(spike[2], 2.0);
  EXPECT_DOUBLE_EQ(spike[0], 10.0 / 3.0);
  EXPECT_DOUBLE_EQ(spike[1], 2.5);

  std::vector<double> alt(108);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  const auto smooth = low_pass_filter(alt);
  ASSERT_EQ(smooth.size(), alt.size());
  for (std::size_t i = 2; i + 2 < alt.size(); ++i) EXPECT_DOUBLE_EQ(smooth[i], 0.2 * alt[i]);
  EXPECT_TRUE(low_pass_filter(std::vector<double>{}).empty());
}

PatientGroup flat_group(const std::string& id, double level) {
  return {id, id, Tensor({kChannelCount, kGroupSteps}, level), 0};
}

void set_channel(PatientGroup& g, Channel c, const std::vector<double>& v) {
  for (std::size_t t = 0; t < kGroupSteps; ++t) g.channels.at(static_cast<std::size_t>(c), t) = v[t];
}

std::vector<double> alternating(double a, double b) {
  std::vector<double> v(kGroupSteps);
  for (std::size_t t = 0; t < kGroupSteps; ++t) v[t] = t % 2 == 0 ? a : b;
  return v;
}

TEST(LowVariance, ScreensStrictlyBelowThreshold) {
  auto lively = flat_group("lively", 0.5);
  for (Channel c : {Channel::kHr, Channel::kMbp, Channel::kRr}) {
    set_channel(lively, c, alternating(0.4, 0.6));
  }
  auto constant = lively;
  constant.group_id = "constant";
  set_channel(constant, Channel::kRr, std::vector<double>(kGroupSteps, 0.3));

  const auto res = exclude_low_variance({lively, constant});
  ASSERT_EQ(res.retained.size(), 1u);
  EXPECT_EQ(res.retained[0].group_id, "lively");
  ASSERT_EQ(res.excluded.size(), 1u);
  EXPECT_EQ(res.excluded[0].group_id, "constant");
  EXPECT_EQ(reason_code(res.excluded[0].reason), "low-variance");

  // Std of the quiet channel sits exactly on the threshold.
  auto boundary = lively;
  const double d = 0.0025 * std::sqrt(107.0 / 108.0);
  set_channel(boundary, Channel::kMbp, alternating(0.5 - d, 0.5 + d));
  const double s = sample_std(boundary.channel(Channel::kMbp));
  EXPECT_NEAR(s, 0.0025, 1e-15);
  EXPECT_EQ(exclude_low_variance({boundary}, s).retained.size(), 1u);
  EXPECT_EQ(exclude_low_variance({boundary}, std::nextafter(s, 1.0)).retained.size(), 0u);
}

TEST(Scale, Examples) {
  const ScalingSpec spec;
  EXPECT_EQ(scale(150, Channel::kHr, spec), 0.5);
  EXPECT_EQ(scale(95, Channel::kMbp, spec), 0.5);
  bool clamped = false;
  EXPECT_EQ(scale(310, Channel::kHr, spec, &clamped), 1.0);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(scale(-4, Channel::kRr, spec, &clamped), 0.0);
  EXPECT_TRUE(clamped);
  scale(40, Channel::kRr, spec, &clamped);
  EXPECT_FALSE(clamped);
}

TEST(Scale, RoundTrip) {
  const ScalingSpec spec;
  Rng rng(4);
  for (int i = 0; i < 3000; ++i) {
    const auto c = static_cast<Channel>(i % 3);
    const double x = rng.uniform(spec[c].min, spec[c].max);
    const double s = scale(x, c, spec);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(unscale(s, c, spec), x, 1e-12);
  }
}

PatientGroup ramp_group(const std::string& patient, const std::string& id) {
  PatientGroup g{patient, id, Tensor({kChannelCount, kGroupSteps}), 0};
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (std::size_t t = 0; t < kGroupSteps; ++t) {
      g.channels.at(c, t) = 0.001 * static_cast<double>(t) + 0.1 * static_cast<double>(c);
    }
  }
  return g;
}

TEST(Window, ShapesAndSlicing) {
  const auto g = ramp_group("p", "g");
  const auto solo = make_window(g, Channel::kHr, false);
  EXPECT_EQ(solo.input.shape(), (Shape{1, kInputSteps}));
  ASSERT_EQ(solo.target.size(), kHorizon);
  EXPECT_TRUE(solo.covariate_channels.empty());

  const auto multi = make_window(g, Channel::kMbp, true);
  EXPECT_EQ(multi.input.shape(), (Shape{3, kInputSteps}));
  EXPECT_EQ(multi.covariate_channels, (std::vector<Channel>{Channel::kHr, Channel::kRr}));
  for (std::size_t t = 0; t < kInputSteps; ++t) {
    EXPECT_EQ(multi.input.at(0, t), g.channels.at(1, t));
    EXPECT_EQ(multi.input.at(1, t), g.channels.at(0, t));
    EXPECT_EQ(multi.input.at(2, t), g.channels.at(2, t));
  }
  for (std::size_t h = 0; h < kHorizon; ++h) {
    EXPECT_EQ(multi.target[h], g.channels.at(1, kInputSteps + h));
  }

  PatientGroup short_group{"p", "s", Tensor({kChannelCount, 100}, 0.5), 0};
  EXPECT_THROW(make_window(short_group, Channel::kHr, false), ContractError);
  EXPECT_EQ(make_windows(g, Channel::kHr, false).size(), 1u);

  PatientGroup long_group{"p", "l", Tensor({kChannelCount, 128}, 0.5), 0};
  EXPECT_EQ(make_windows(long_group, Channel::kHr, false, 10).size(), 3u);
}

std::vector<PatientGroup> groups_for(const std::vector<std::size_t>& per_patient) {
  std::vector<PatientGroup> out;
  for (std::size_t p = 0; p < per_patient.size(); ++p) {
    for (std::size_t g = 0; g < per_patient[p]; ++g) {
      out.push_back(ramp_group("p" + std::to_string(p), "p" + std::to_string(p) + "g" + std::to_string(g)));
    }
  }
  return out;
}

std::set<std::string> patients_of(const std::vector<PatientGroup>& gs) {
  std::set<std::string> out;
  for (const auto& g : gs) out.insert(g.patient_id);
  return out;
}

std::vector<std::string> ids(const std::vector<PatientGroup>& gs) {
  std::vector<std::string> out;
  for (const auto& g : gs) out.push_back(g.group_id);
  return out;
}

TEST(Split, TenPatientsGiveEightOneOne) {
  const auto groups = groups_for(std::vector<std::size_t>(10, 1));
  const auto s = split_dataset(groups, 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  const auto again = split_dataset(groups, 1);
  EXPECT_EQ(ids(again.train), ids(s.train));
  EXPECT_EQ(ids(again.test), ids(s.test));
  EXPECT_THROW(split_dataset(groups_for({3, 4}), 1), DataError);
}

TEST(Split, PatientLevelDisjointnessOverSeeds) {
  std::vector<std::size_t> sizes;
  for (std::size_t p = 0; p < 40; ++p) sizes.push_back(1 + p % 5);
  const auto groups = groups_for(sizes);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = split_dataset(groups, seed);
    const auto a = patients_of(s.train);
    const auto b = patients_of(s.validation);
    const auto c = patients_of(s.test);
    for (const auto& p : a) EXPECT_TRUE(!b.count(p) && !c.count(p));
    for (const auto& p : b) EXPECT_FALSE(c.count(p));
    EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), groups.size());
    EXPECT_FALSE(s.validation.empty());
    EXPECT_FALSE(s.test.empty());
    // Whole patients move together, so each share can overshoot by at most one patient.
    EXPECT_LE(s.test.size(), 12u + 4u);
    EXPECT_GE(s.test.size(), 12u);
    EXPECT_GE(s.validation.size(), 12u);
  }
}

TEST(Synthetic, NoiselessMatchesAnalyticProfile) {
  SyntheticConfig cfg;
  cfg.noise_sd = {0.0, 0.0, 0.0};
  const auto a = generate_synthetic(5, 3, cfg);
  const auto b = generate_synthetic(5, 3, cfg);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].channels, b[i].channels);
  const auto profiles = synthetic_profiles(5, 3, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      for (std::size_t t = 0; t < kGroupSteps; ++t) {
        EXPECT_EQ(a[i].channels.at(c, t), profiles[i].value(static_cast<Channel>(c), t));
      }
    }
  }
}

TEST(Synthetic, SeededAndInRange) {
  const auto a = generate_synthetic(20, 5);
  const auto b = generate_synthetic(20, 5);
  const auto c = generate_synthetic(20, 6);
  bool differs = false;
  const ScalingSpec spec;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].channels, b[i].channels);
    differs |= a[i].channels != c[i].channels;
    for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
      for (double v : a[i].channel(static_cast<Channel>(ch))) {
        EXPECT_GE(v, spec.ranges[ch].min);
        EXPECT_LE(v, spec.ranges[ch].max);
      }
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Synthetic, DeteriorationLowersFinalHourMbp) {
  SyntheticConfig cfg;
  cfg.noise_sd = {0.0, 0.0, 0.0};
  cfg.deterioration_fraction = 1.0;
  for (const auto& g : generate_synthetic(200, 8, cfg)) {
    const auto mbp = g.channel(Channel::kMbp);
    double first = 0, last = 0;
    for (std::size_t t = 0; t < 12; ++t) {
      first += mbp[t];
      last += mbp[kGroupSteps - 12 + t];
    }
    EXPECT_LT(last, first) << g.group_id;
  }
}

TEST(Pipeline, CsvRoundTripMatchesDirectPath) {
  const auto physical = generate_synthetic(12, 21);
  const auto raw = to_raw_records(physical);
  std::istringstream vitals(format_vitals_csv(raw.vitals));
  std::istringstream dx(format_diagnosis_csv(raw.diagnoses));
  const auto via_csv = run_pipeline(ingest_csv(vitals, "v"), ingest_diagnoses(dx, "d"));
  const auto direct = finalize_groups(physical);
  ASSERT_EQ(via_csv.groups.size(), direct.groups.size());
  for (std::size_t i = 0; i < direct.groups.size(); ++i) {
    EXPECT_EQ(via_csv.groups[i].group_id, direct.groups[i].group_id);
    for (std::size_t k = 0; k < direct.groups[i].channels.size(); ++k) {
      EXPECT_NEAR(via_csv.groups[i].channels[k], direct.groups[i].channels[k], 1e-12);
    }
  }
  for (const auto& g : via_csv.groups) {
    for (double v : g.channels.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

std::vector<RawVitalRecord> steady_rows(const std::string& patient, std::int64_t end) {
  std::vector<RawVitalRecord> rows;
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(kGroupSteps); ++t) {
    const double wiggle = t % 2 == 0 ? 5.0 : -5.0;
    rows.push_back({patient, end - 5 * (107 - t), 90 + wiggle, 120 + wiggle, 70 + wiggle,
                    18 + wiggle});
  }
  return rows;
}

TEST(Pipeline, EveryExclusionCarriesReason) {
  std::vector<RawVitalRecord> rows;
  std::vector<DiagnosisRecord> dx;
  auto add = [&](const std::string& id, std::vector<RawVitalRecord> r) {
    rows.insert(rows.end(), r.begin(), r.end());
    dx.push_back({id, id + "-g", 1000, DiagnosisLabel::kSepsis});
  };
  add("ok", steady_rows("ok", 1000));
  auto gap = steady_rows("gap", 1000);
  for (int t = 40; t < 46; ++t) gap[t].hr.reset();
  add("gap", gap);
  auto lead = steady_rows("lead", 1000);
  lead[0].rr.reset();
  add("lead", lead);
  auto inverted = steady_rows("inv", 1000);
  inverted[50].sbp = 60;
  add("inv", inverted);
  auto flat = steady_rows("flat", 1000);
  for (auto& r : flat) r.rr = 18;
  add("flat", flat);
  auto jitter = steady_rows("jit", 1000);
  for (auto& r : jitter) r.offset_min += 2;  // still snaps to the same slots
  add("jit", jitter);
  auto five = steady_rows("five", 1000);
  for (int t = 40; t < 45; ++t) five[t].hr.reset();
  add("five", five);

  std::istringstream in(format_vitals_csv(rows));
  const auto res = run_pipeline(ingest_csv(in, "v"), dx);
  EXPECT_EQ(format_exclusion_log(res.exclusions),
            "gap-g,gap-too-long\nlead-g,leading-missing\ninv-g,sbp<dbp\nflat-g,low-variance\n");
  ASSERT_EQ(res.groups.size(), 3u);
  EXPECT_EQ(res.groups[1].channels, res.groups[0].channels);
  for (const auto& g : res.groups) EXPECT_TRUE(g.channels.all_finite());
}

TEST(Pipeline, WindowsAreDeterministic) {
  auto build = [] {
    const auto groups = finalize_groups(generate_synthetic(30, 2)).groups;
    const auto split = split_dataset(groups, 7);
    std::ostringstream out;
    out.precision(17);
    for (const auto& w : make_windows(split.train, Channel::kMbp, true)) {
      out << w.group_id;
      for (double v : w.input.data()) out << ',' << v;
      for (double v : w.target) out << ',' << v;
      out << '\n';
    }
    return out.str();
  };
  const auto a = build();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, build());
}

TEST(Batch, StacksWindows) {
  const auto g = ramp_group("p", "g");
  const std::vector<WindowSample> ws{make_window(g, Channel::kHr, true), make_window(g, Channel::kHr, true)};
  const auto b = make_batch(ws);
  EXPECT_EQ(b.inputs.shape(), (Shape{2, 3 * kInputSteps}));
  EXPECT_EQ(b.targets.shape(), (Shape{2, kHorizon}));
  EXPECT_EQ(b.inputs.at(1, kInputSteps), ws[1].input.at(1, 0));
}

}  // namespace
}  // namespace vitalcast::data
