// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "path_oracle.hpp"
#include "test_util.hpp"
#include "vitalcast/core/ops.hpp"
#include "vitalcast/data/dataset.hpp"
#include "vitalcast/data/synthetic.hpp"
#include "vitalcast/eval/metrics.hpp"
#include "vitalcast/experiment/config.hpp"
#include "vitalcast/experiment/table.hpp"
#include "vitalcast/experiment/trainer.hpp"
#include "vitalcast/losses/dilate.hpp"
#include "vitalcast/losses/soft_dtw.hpp"
#include "vitalcast/models/basis.hpp"
#include "vitalcast/models/checkpoint.hpp"
#include "vitalcast/models/tft.hpp"

using namespace vitalcast;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> uniform_series(std::size_t k, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

std::vector<double> normal_series(std::size_t k, Rng& rng) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.normal();
  return v;
}

void soft_dtw_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  int cases = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t k = 1 + rng.below(4);
    const auto a = uniform_series(k, rng);
    const auto b = uniform_series(k, rng);
    const Tensor delta = losses::cost_matrix(a, b);
    for (double gamma : {1.0, 0.1, 0.01}) {
      const double dp = losses::soft_dtw(delta, gamma).value;
      const double brute = test::enumerate_alignment(delta, gamma).soft_value;
      worst = std::max(worst, std::abs(dp - brute));
      ++cases;
    }
  }
  const double elapsed = seconds_since(start);
  report(1, "soft-DTW oracle equivalence", worst <= 1e-8 && elapsed < 5.0,
         fmt("max |dp - enumeration| = %.3g over %d cases (tol 1e-8), %.3f s (limit 5 s)", worst,
             cases, elapsed));
}

void temporal_oracle() {
  Rng rng(202);
  const Tensor omega = losses::omega_matrix(3);
  double worst = 0.0;
  const double gammas[] = {1.0, 0.1, 0.01};
  for (int pair = 0; pair < 50; ++pair) {
    const double gamma = gammas[pair % 3];
    const Tensor delta = losses::cost_matrix(uniform_series(3, rng), uniform_series(3, rng));
    const auto stats = losses::soft_dtw_alignment(delta, gamma);
    const double direct = test::enumerate_alignment(delta, gamma, &omega).weighted;
    worst = std::max(worst, std::abs(losses::temporal_loss(stats.expected, omega) - direct));
  }
  report(2, "temporal-term oracle equivalence", worst <= 1e-10,
         fmt("max |<E, omega> - (1/Z) sum_A <A, omega> exp(-<A, delta>/gamma)| = %.3g over 50 "
             "pairs, k = 3 (tol 1e-10)",
             worst));
}

void gamma_limit() {
  Rng rng(303);
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    const Tensor delta = losses::cost_matrix(normal_series(10, rng), normal_series(10, rng));
    worst = std::max(worst, std::abs(losses::soft_dtw(delta, 1e-3).value - losses::hard_dtw(delta)));
  }
  // Context for the reader: the same bound on uniform [0, 1] series, where
  // near-tied alignments are common.
  Rng urng(304);
  int over = 0;
  const int draws = 2000;
  for (int pair = 0; pair < draws; ++pair) {
    const Tensor delta = losses::cost_matrix(uniform_series(10, urng, 0, 1), uniform_series(10, urng, 0, 1));
    over += std::abs(losses::soft_dtw(delta, 1e-3).value - losses::hard_dtw(delta)) >= 1e-3;
  }
  report(3, "gamma -> 0 consistency", worst < 1e-3,
         fmt("max |soft_dtw(1e-3) - hard_dtw| = %.3g over 50 N(0,1) pairs, k = 10 (tol 1e-3); "
             "note: %d/%d U(0,1) pairs exceed 1e-3",
             worst, over, draws));
}

// Relative error of the model's reverse-mode parameter gradient against
// central differences over every parameter.
double model_gradient_error(const models::ForecastModel& model, const Tensor& x,
                            const Tensor& target) {
  auto params = model.parameter_vars();
  std::size_t total = 0;
  for (const auto& p : params) total += p.value().size();
  Tensor flat({total});
  std::size_t at = 0;
  for (const auto& p : params) {
    const Tensor v = p.value();
    for (double d : v.data()) flat[at++] = d;
  }
  auto loss = [&] {
    auto ctx = models::ForwardContext::evaluation();
    return losses::mse(model.forward(Var(x), ctx), Var(target));
  };
  auto load = [&](const Tensor& values) {
    std::size_t i = 0;
    for (auto& p : params) {
      for (auto& d : p.mutable_value().storage()) d = values[i++];
    }
  };
  for (auto& p : params) p.zero_grad();
  backward(loss());
  Tensor analytic({total});
  at = 0;
  for (const auto& p : params) {
    const Tensor g = p.grad();
    for (double d : g.data()) analytic[at++] = d;
  }
  const Tensor numeric = finite_difference_gradient(
      [&](const Tensor& probe) {
        load(probe);
        return loss().value().item();
      },
      flat);
  load(flat);
  return relative_error(analytic, numeric);
}

void gradient_suite() {
  const auto start = Clock::now();
  Rng rng(404);
  double dilate_worst = 0.0, mse_worst = 0.0, nbeats_worst = 0.0, nhits_worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::size_t k = 4 + rng.below(33);
    const auto pred = uniform_series(k, rng, 0, 1);
    const auto target = uniform_series(k, rng, 0, 1);
    const losses::DilateConfig cfg{rng.uniform(0, 1), i % 2 == 0 ? 0.1 : 0.01};
    const Tensor analytic = losses::dilate_backward(pred, target, cfg);
    const Tensor numeric = finite_difference_gradient(
        [&](const Tensor& p) { return losses::dilate_loss(p.data(), target, cfg); },
        Tensor::vector(pred));
    dilate_worst = std::max(dilate_worst, relative_error(analytic, numeric));

    const Tensor mse_numeric = finite_difference_gradient(
        [&](const Tensor& p) { return losses::mse_loss(p.data(), target); }, Tensor::vector(pred));
    mse_worst = std::max(mse_worst, relative_error(losses::mse_gradient(pred, target), mse_numeric));
  }
  for (int i = 0; i < 10; ++i) {
    const std::size_t channels = 1 + 2 * (i % 2);
    const Tensor x = test::random_tensor({2, channels * models::kInputSteps}, rng, 0, 1);
    const Tensor y = test::random_tensor({2, models::kHorizon}, rng, 0, 1);
    const models::NBeatsModel nbeats({3, 1, 32, 8, channels}, 500 + i);
    nbeats_worst = std::max(nbeats_worst, model_gradient_error(nbeats, x, y));
    const models::NHitsModel nhits({1, 32, 8, channels, {8, 4, 1}, {6, 12, 36}}, 600 + i);
    nhits_worst = std::max(nhits_worst, model_gradient_error(nhits, x, y));
  }
  const double worst = std::max({dilate_worst, mse_worst, nbeats_worst, nhits_worst});
  report(4, "gradient suite", worst < 1e-4,
         fmt("max relative error: dilate_backward %.2g, mse %.2g, N-BEATS(w=32, all params) "
             "%.2g, N-HiTS(w=32, all params) %.2g; 10 instances each (tol 1e-4), %.1f s",
             dilate_worst, mse_worst, nbeats_worst, nhits_worst, seconds_since(start)));
}

double sum_identity_error(const models::DoublyResidualModel& model, const Tensor& x) {
  const auto t = model.trace(Var(x));
  double worst = 0.0;
  for (std::size_t i = 0; i < t.forecast.value().size(); ++i) {
    double s = 0.0;
    for (const auto& f : t.block_forecasts) s += f.value()[i];
    worst = std::max(worst, std::abs(s - t.forecast.value()[i]));
  }
  return worst;
}

void construction_invariants() {
  Rng rng(505);
  double sum_err = 0.0, degenerate_err = 0.0, attention_err = 0.0, vsn_err = 0.0;
  bool mask_exact = true;
  for (int i = 0; i < 5; ++i) {
    const std::size_t channels = i % 2 == 0 ? 1 : 3;
    const Tensor x = test::random_tensor({4, channels * models::kInputSteps}, rng, 0, 1);
    const models::NBeatsModel nbeats({3, 2, 32, 8, channels}, 10 + i);
    const models::NHitsModel nhits({2, 32, 8, channels, {8, 4, 1}, {6, 12, 36}}, 20 + i);
    sum_err = std::max({sum_err, sum_identity_error(nbeats, x), sum_identity_error(nhits, x)});

    const models::NHitsModel flat({2, 32, 8, channels, {1, 1, 1}, {36, 36, 36}}, 30 + i);
    models::restore_parameters(flat, models::snapshot(nbeats, ""));
    const Tensor a = flat.predict(x), b = nbeats.predict(x);
    for (std::size_t j = 0; j < a.size(); ++j) degenerate_err = std::max(degenerate_err, std::abs(a[j] - b[j]));

    const models::TftModel tft({16, 4, 0.1, channels}, 40 + i);
    auto ctx = models::ForwardContext::evaluation();
    const auto trace = tft.trace(Var(test::random_tensor({2, channels * models::kInputSteps}, rng, 0, 1)), ctx);
    for (const auto& sample : trace.attention) {
      for (const auto& w : sample.weights) {
        const Tensor& v = w.value();
        for (std::size_t q = 0; q < v.rows(); ++q) {
          double s = 0.0;
          for (std::size_t k = 0; k < v.cols(); ++k) {
            s += v.at(q, k);
            if (k > models::kInputSteps + q && v.at(q, k) != 0.0) mask_exact = false;
          }
          attention_err = std::max(attention_err, std::abs(s - 1.0));
        }
      }
    }
    const Tensor& sel = trace.encoder_selection.weights.value();
    for (std::size_t r = 0; r < sel.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < sel.cols(); ++c) s += sel.at(r, c);
      vsn_err = std::max(vsn_err, std::abs(s - 1.0));
    }
  }
  const bool ok = sum_err <= 1e-12 && degenerate_err <= 1e-12 && attention_err <= 1e-12 &&
                  vsn_err <= 1e-12 && mask_exact;
  report(5, "construction invariants", ok,
         fmt("sum-of-block-forecasts err %.2g, N-HiTS(k=1, m=36) vs N-BEATS err %.2g, "
             "attention row-sum err %.2g, VSN row-sum err %.2g (tol 1e-12), causal mask %s",
             sum_err, degenerate_err, attention_err, vsn_err, mask_exact ? "exact" : "LEAKS"));
}

experiment::ExperimentConfig smoke_config(const std::string& model_lines) {
  return experiment::parse_config(
      "data.source = sine\ndata.samples = 8\ntrain.batch_size = 8\ntrain.max_epochs = 2000\n"
      "train.max_steps = 2000\ntrain.patience = 2000\n" + model_lines);
}

void overfit_smoke() {
  const auto start = Clock::now();
  std::string detail;
  bool ok = true;
  const std::pair<const char*, const char*> runs[] = {
      {"N-BEATS", "model = nbeats\n"},
      {"N-HiTS", "model = nhits\n"},
      {"TFT", "model = tft\nmodel.hidden = 16\nmodel.heads = 4\nmodel.dropout = 0\n"},
  };
  for (const auto& [name, lines] : runs) {
    const auto cfg = smoke_config(lines);
    const auto data = experiment::prepare_data(cfg);
    auto model = experiment::build_model(cfg);
    const auto result = experiment::train_model(*model, data, cfg);
    const double mse = experiment::dataset_mse(*model, data.train);
    ok &= mse < 1e-3 && result.steps <= 2000;
    detail += fmt("%s MSE %.2g in %zu steps; ", name, mse, result.steps);
  }
  const double elapsed = seconds_since(start);
  ok &= elapsed < 300.0;
  report(6, "overfit smoke test", ok,
         detail + fmt("total %.1f s (tol MSE < 1e-3, <= 2000 steps, < 300 s)", elapsed));
}

// Observed on the benchmark below; a change means training or data drifted.
constexpr std::size_t kBenchmarkCrossover = 10;

void benchmark() {
  const auto start = Clock::now();
  const auto cfg = experiment::parse_config(
      "data.source = synthetic\ndata.patients = 200\ndata.deterioration = 1.0\nmodel = nhits\n"
      "target = mbp\nseed = 42\n");
  const auto data = experiment::prepare_data(cfg);
  auto model = experiment::build_model(cfg);
  experiment::train_model(*model, data, cfg);
  const auto trained = eval::evaluate_model(*model, data.test, {"nhits", cfg.target, false, "mse"});
  const models::PersistenceModel persistence;
  const auto base = eval::evaluate_model(persistence, data.test, {"persistence", cfg.target, false, ""});
  bool monotone = true;
  for (std::size_t h = 1; h < base.horizon_curve.size(); ++h) {
    monotone &= base.horizon_curve[h] >= base.horizon_curve[h - 1];
  }
  const auto cross = eval::crossover(trained.horizon_curve, base.horizon_curve);
  const bool ok = monotone && cross && *cross <= 36 && *cross == kBenchmarkCrossover;
  report(7, "desk-scale benchmark", ok,
         fmt("persistence curve %s; N-HiTS crosses below persistence at h=%s (fixture h=%zu); "
             "DTW@36 N-HiTS %.4g vs persistence %.4g; %zu test windows, %.1f s",
             monotone ? "non-decreasing" : "DECREASES",
             cross ? std::to_string(*cross).c_str() : "never", kBenchmarkCrossover, trained.dtw,
             base.dtw, trained.n_samples, seconds_since(start)));
}

std::string split_fingerprint(const std::vector<data::PatientGroup>& groups, std::uint64_t seed) {
  const auto split = data::split_dataset(groups, seed);
  std::ostringstream out;
  out.precision(17);
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& w : data::make_windows(*part, data::Channel::kHr, true)) {
      out << w.group_id;
      for (double v : w.input.data()) out << ',' << v;
      for (double v : w.target) out << ',' << v;
      out << '\n';
    }
    out << "--\n";
  }
  return out.str();
}

void determinism_and_hygiene() {
  std::string detail;
  // Splits.
  const auto groups = data::finalize_groups(data::generate_synthetic(60, 9)).groups;
  const bool splits = split_fingerprint(groups, 3) == split_fingerprint(groups, 3);

  // Checkpoints and reports.
  const auto cfg = experiment::parse_config(
      "data.patients = 40\nmodel = nhits\nmodel.width = 32\nmodel.theta = 8\ntrain.max_epochs = 5\n");
  auto once = [&] {
    const auto d = experiment::prepare_data(cfg);
    auto m = experiment::build_model(cfg);
    experiment::train_model(*m, d, cfg);
    std::ostringstream ckpt;
    models::write_checkpoint(ckpt, models::snapshot(*m, experiment::to_text(cfg)));
    const auto r = eval::evaluate_model(*m, d.test, {"nhits", cfg.target, false, "mse"});
    return std::pair{ckpt.str(), eval::metrics_json({r}) + eval::horizon_curve_csv({r})};
  };
  const auto a = once(), b = once();
  const bool checkpoints = a.first == b.first;
  const bool reports = a.second == b.second;

  // Exclusion reasons on a damaged raw export.
  auto raw = data::to_raw_records(data::generate_synthetic(40, 11));
  Rng rng(12);
  for (std::size_t g = 0; g < 40; ++g) {
    auto* rows = &raw.vitals[g * data::kGroupSteps];
    switch (g % 5) {
      case 0: for (int t = 30; t < 37; ++t) rows[t].hr.reset(); break;
      case 1: rows[0].rr.reset(); break;
      case 2: rows[50].sbp = *rows[50].dbp - 5; break;
      case 3: for (std::size_t t = 0; t < data::kGroupSteps; ++t) rows[t].rr = 20; break;
      default: break;
    }
  }
  const auto piped = data::run_pipeline(raw.vitals, raw.diagnoses);
  const std::set<std::string> codes{"gap-too-long", "low-variance", "leading-missing", "sbp<dbp"};
  bool reasons = piped.groups.size() + piped.exclusions.size() == raw.diagnoses.size();
  std::istringstream log(data::format_exclusion_log(piped.exclusions));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    ++lines;
    reasons &= codes.count(line.substr(line.find(',') + 1)) == 1;
  }
  reasons &= lines == piped.exclusions.size() && lines == 32;

  // Scaling round trip and MBP.
  const data::ScalingSpec spec;
  double round_trip = 0.0;
  bool mbp = true;
  for (int i = 0; i < 100000; ++i) {
    const auto c = static_cast<data::Channel>(i % 3);
    const double v = rng.uniform(spec[c].min, spec[c].max);
    round_trip = std::max(round_trip, std::abs(data::unscale(data::scale(v, c, spec), c, spec) - v));
    const double dbp = rng.uniform(20, 120), sbp = dbp + rng.uniform(0, 100);
    mbp &= data::derive_mbp(sbp, dbp) == dbp + (sbp - dbp) / 3.0;
  }
  const bool ok = splits && checkpoints && reports && reasons && round_trip <= 1e-12 && mbp;
  report(8, "pipeline determinism and hygiene", ok,
         fmt("splits %s, checkpoints %s, reports %s; %zu/%zu exclusions carry a valid reason code; "
             "scale round-trip max err %.2g (tol 1e-12); MBP formula %s",
             splits ? "identical" : "DIFFER", checkpoints ? "identical" : "DIFFER",
             reports ? "identical" : "DIFFER", lines, piped.exclusions.size(), round_trip,
             mbp ? "exact" : "INEXACT"));
}

void table_fixture() {
  using data::Channel;
  struct Cell {
    const char* model;
    bool cov;
    const char* loss;
    double mbp_mse, mbp_dtw, hr_mse, hr_dtw;
  };
  // Reference table cells; MSE* is divided back to raw MSE.
  const Cell cells[] = {
      {"persistence", false, "", 24.55, 34.50, 7.35, 17.52},
      {"nhits", true, "mse", 18.78, 20.44, 7.37, 13.12},
      {"nhits", true, "dilate", 19.99, 16.73, 7.57, 10.05},
      {"nhits", false, "mse", 18.02, 20.46, 7.22, 13.97},
      {"nhits", false, "dilate", 19.81, 16.32, 7.18, 7.92},
      {"nbeats", true, "mse", 19.79, 19.37, 8.73, 14.36},
      {"nbeats", true, "dilate", 24.40, 18.59, 10.95, 14.20},
      {"nbeats", false, "mse", 18.52, 17.63, 7.48, 10.71},
      {"nbeats", false, "dilate", 27.42, 18.60, 12.98, 17.90},
      {"tft", true, "mse", 18.89, 25.93, 7.71, 16.12},
      {"tft", true, "dilate", 19.10, 23.51, 7.19, 15.16},
      {"tft", false, "mse", 19.45, 25.65, 8.12, 16.65},
      {"tft", false, "dilate", 19.00, 23.46, 7.57, 15.79},
  };
  std::vector<eval::EvalReport> reports;
  for (const auto& c : cells) {
    for (auto [target, mse, dtw] : {std::tuple{Channel::kMbp, c.mbp_mse, c.mbp_dtw},
                                    std::tuple{Channel::kHr, c.hr_mse, c.hr_dtw}}) {
      eval::EvalReport r;
      r.key = {c.model, target, c.cov, c.loss};
      r.mse = mse / eval::kMseDisplayScale;
      r.mse_scaled = r.mse * eval::kMseDisplayScale;
      r.dtw = dtw;
      reports.push_back(r);
    }
  }
  const std::string expected_rows[] = {
      "Persistence  -      | 24.55   24.55   34.50   34.50   | 7.35    7.35    17.52   17.52",
      "N-HiTS       W C    | 18.78   19.99   20.44   16.73   | 7.37    7.57    13.12   10.05",
      "N-HiTS       W/o C  | 18.02   19.81   20.46   16.32   | 7.22    7.18    13.97   7.92",
      "N-BEATS      W C    | 19.79   24.40   19.37   18.59   | 8.73    10.95   14.36   14.20",
      "N-BEATS      W/o C  | 18.52   27.42   17.63   18.60   | 7.48    12.98   10.71   17.90",
      "TFT          W C    | 18.89   19.10   25.93   23.51   | 7.71    7.19    16.12   15.16",
      "TFT          W/o C  | 19.45   19.00   25.65   23.46   | 8.12    7.57    16.65   15.79",
  };
  const auto table = experiment::render_results_table(reports);
  std::size_t matched = 0;
  for (const auto& row : expected_rows) matched += table.find(row + "\n") != std::string::npos;

  eval::EvalReport one;
  one.key = {"nhits", Channel::kMbp, true, "mse"};
  one.mse = 0.001878;
  one.mse_scaled = one.mse * eval::kMseDisplayScale;
  one.dtw = 20.44;
  const bool scaled = experiment::render_results_table({one}).find("| 18.78   —") != std::string::npos;
  const bool ok = matched == std::size(expected_rows) && scaled;
  std::printf("%s", table.c_str());
  report(9, "table rendering fixture", ok,
         fmt("%zu/%zu reference rows reproduced (persistence MBP 24.55/34.50, HR 7.35/17.52); "
             "MSE 0.001878 renders as 18.78: %s",
             matched, std::size(expected_rows), scaled ? "yes" : "NO"));
}

}  // namespace

int main() {
  soft_dtw_oracle();
  temporal_oracle();
  gamma_limit();
  gradient_suite();
  construction_invariants();
  overfit_smoke();
  benchmark();
  determinism_and_hygiene();
  table_fixture();
  std::printf("%d criteria failed\n", failures);
  return failures;
}
