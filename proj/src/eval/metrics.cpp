#include "vitalcast/eval/metrics.hpp"

#include <cstdio>

#include <json.hpp>

#include "vitalcast/error.hpp"
#include "vitalcast/losses/soft_dtw.hpp"

namespace vitalcast::eval {

double hard_dtw(std::span<const double> a, std::span<const double> b) {
  return losses::hard_dtw(losses::cost_matrix(a, b));
}

std::string EvalKey::label() const {
  std::string out = model;
  if (!loss.empty()) out += "-" + loss;
  if (model != "persistence") {
    out += "-";
    out += data::channel_name(target);
    out += covariates ? "-cov" : "-nocov";
  }
  return out;
}

std::vector<double> horizon_curve(const Tensor& forecasts, const Tensor& targets) {
  if (forecasts.shape() != targets.shape() || forecasts.rank() != 2) {
    throw DimensionError("forecasts " + shape_to_string(forecasts.shape()) + " vs targets " +
                         shape_to_string(targets.shape()));
  }
  const std::size_t n = forecasts.rows();
  const std::size_t k = forecasts.cols();
  std::vector<double> curve(k, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto f = forecasts.data().subspan(s * k, k);
    const auto y = targets.data().subspan(s * k, k);
    for (std::size_t h = 1; h <= k; ++h) curve[h - 1] += hard_dtw(f.first(h), y.first(h));
  }
  for (auto& v : curve) v /= static_cast<double>(n);
  return curve;
}

EvalReport evaluate_forecasts(const Tensor& forecasts, const Tensor& targets, EvalKey key) {
  if (forecasts.rank() != 2 || forecasts.rows() == 0) throw DataError("empty test set");
  EvalReport r;
  r.key = std::move(key);
  r.n_samples = forecasts.rows();
  r.horizon_curve = horizon_curve(forecasts, targets);
  double sq = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    sq += (forecasts[i] - targets[i]) * (forecasts[i] - targets[i]);
  }
  r.mse = sq / static_cast<double>(forecasts.size());
  r.mse_scaled = r.mse * kMseDisplayScale;
  r.dtw = r.horizon_curve.back();
  return r;
}

EvalReport evaluate_model(const models::ForecastModel& model,
                          std::span<const data::WindowSample> samples, EvalKey key) {
  if (samples.empty()) throw DataError("empty test set");
  if (key.model.empty()) key.model = model.kind();
  const auto batch = data::make_batch(samples);
  return evaluate_forecasts(model.predict(batch.inputs), batch.targets, std::move(key));
}

std::vector<double> horizon_sweep(const models::ForecastModel& model,
                                  std::span<const data::WindowSample> samples) {
  const auto batch = data::make_batch(samples);
  return horizon_curve(model.predict(batch.inputs), batch.targets);
}

std::optional<std::size_t> crossover(std::span<const double> model,
                                     std::span<const double> baseline) {
  const std::size_t n = std::min(model.size(), baseline.size());
  for (std::size_t h = 0; h < n; ++h) {
    if (model[h] < baseline[h]) return h + 1;
  }
  return std::nullopt;
}

std::vector<CrossoverSummary> compare_to_persistence(const std::vector<EvalReport>& reports,
                                                     const EvalReport& persistence) {
  std::vector<CrossoverSummary> out;
  for (const auto& r : reports) {
    if (r.key.model == "persistence") continue;
    out.push_back({r.key.label(), crossover(r.horizon_curve, persistence.horizon_curve)});
  }
  return out;
}

std::string describe(const CrossoverSummary& s) {
  return s.first_horizon ? "h=" + std::to_string(*s.first_horizon) : "never";
}

std::string metrics_json(const std::vector<EvalReport>& reports) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    doc.push_back({{"model", r.key.model},
                   {"target", data::channel_name(r.key.target)},
                   {"covariates", r.key.covariates},
                   {"loss", r.key.loss},
                   {"n_samples", r.n_samples},
                   {"mse", r.mse},
                   {"mse_x1e4", r.mse_scaled},
                   {"dtw", r.dtw},
                   {"horizon_curve", r.horizon_curve}});
  }
  return doc.dump(2) + "\n";
}

std::vector<EvalReport> parse_metrics_json(const std::string& text) {
  std::vector<EvalReport> out;
  try {
    for (const auto& item : nlohmann::json::parse(text)) {
      EvalReport r;
      r.key.model = item.at("model").get<std::string>();
      r.key.target = data::parse_channel(item.at("target").get<std::string>());
      r.key.covariates = item.at("covariates").get<bool>();
      r.key.loss = item.at("loss").get<std::string>();
      r.n_samples = item.at("n_samples").get<std::size_t>();
      r.mse = item.at("mse").get<double>();
      r.mse_scaled = item.at("mse_x1e4").get<double>();
      r.dtw = item.at("dtw").get<double>();
      r.horizon_curve = item.at("horizon_curve").get<std::vector<double>>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics document: ") + e.what());
  }
  return out;
}

std::string horizon_curve_csv(const std::vector<EvalReport>& reports) {
  std::string out = "horizon_step,model,dtw\n";
  char buf[64];
  for (const auto& r : reports) {
    const auto label = r.key.label();
    for (std::size_t h = 0; h < r.horizon_curve.size(); ++h) {
      std::snprintf(buf, sizeof buf, ",%.17g\n", r.horizon_curve[h]);
      out += std::to_string(h + 1) + "," + label + buf;
    }
  }
  return out;
}

}  // namespace vitalcast::eval
