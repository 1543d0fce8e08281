#include "vitalcast/experiment/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "vitalcast/core/optim.hpp"
#include "vitalcast/data/synthetic.hpp"
#include "vitalcast/losses/dilate.hpp"

namespace vitalcast::experiment {

std::vector<data::PatientGroup> sine_groups(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<data::PatientGroup> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double period = rng.uniform(18.0, 54.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amplitude = rng.uniform(0.15, 0.3);
    const double level = rng.uniform(0.4, 0.6);
    const std::string id = "sine" + std::to_string(i + 1);
    data::PatientGroup g{id, id, Tensor({data::kChannelCount, data::kGroupSteps}), 0};
    for (std::size_t c = 0; c < data::kChannelCount; ++c) {
      for (std::size_t t = 0; t < data::kGroupSteps; ++t) {
        g.channels.at(c, t) =
            level + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period +
                                         phase + 0.7 * static_cast<double>(c));
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

Datasets prepare_data(const ExperimentConfig& cfg) {
  Datasets out;
  auto windows = [&](const std::vector<data::PatientGroup>& groups) {
    return data::make_windows(groups, cfg.target, cfg.covariates);
  };
  if (cfg.data.source == DataSource::kSine) {
    out.train = windows(sine_groups(cfg.data.samples, cfg.data.seed));
    out.validation = out.train;
    out.test = out.train;
    return out;
  }

  data::PipelineResult pipeline;
  if (cfg.data.source == DataSource::kCsv) {
    check_inputs(cfg);
    pipeline = data::run_pipeline(data::ingest_csv(cfg.data.vitals),
                                  data::ingest_diagnoses(cfg.data.diagnoses));
  } else {
    data::SyntheticConfig synth;
    synth.deterioration_fraction = cfg.data.deterioration;
    for (auto& sd : synth.noise_sd) sd *= cfg.data.noise;
    pipeline = data::finalize_groups(data::generate_synthetic(cfg.data.patients, cfg.data.seed, synth));
  }
  const auto split = data::split_dataset(pipeline.groups, cfg.seed);
  out.train = windows(split.train);
  out.validation = windows(split.validation);
  out.test = windows(split.test);
  out.exclusions = std::move(pipeline.exclusions);
  out.warnings = std::move(pipeline.warnings);
  return out;
}

Var training_loss(const Var& pred, const Tensor& target, const ExperimentConfig& cfg) {
  if (cfg.loss == LossKind::kDilate) return losses::dilate(pred, target, cfg.dilate);
  return losses::mse(pred, Var(target));
}

double dataset_loss(const models::ForecastModel& model,
                    std::span<const data::WindowSample> samples, const ExperimentConfig& cfg) {
  const auto batch = data::make_batch(samples);
  return training_loss(Var(model.predict(batch.inputs)), batch.targets, cfg).value().item();
}

double dataset_mse(const models::ForecastModel& model,
                   std::span<const data::WindowSample> samples) {
  const auto batch = data::make_batch(samples);
  const Tensor pred = model.predict(batch.inputs);
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sq += (pred[i] - batch.targets[i]) * (pred[i] - batch.targets[i]);
  }
  return sq / static_cast<double>(pred.size());
}

TrainResult train_model(const models::ForecastModel& model, const Datasets& data,
                        const ExperimentConfig& cfg,
                        const std::function<void(const EpochLog&)>& on_epoch) {
  TrainResult result;
  auto params = model.parameter_vars();
  if (params.empty() || data.train.empty()) return result;
  auto state = make_adam_state(params, {.learning_rate = cfg.train.lr});
  Rng rng(cfg.seed ^ 0x5851f42d4c957f2dULL);

  std::vector<Tensor> best;
  result.best_validation = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  bool out_of_steps = false;
  for (std::size_t epoch = 1; epoch <= cfg.train.max_epochs && !out_of_steps; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    double total = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.train.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.train.batch_size);
      const auto batch = data::make_batch(
          data.train, std::span<const std::size_t>(order).subspan(start, end - start));
      auto ctx = models::ForwardContext::training(rng.next());
      const Var loss = training_loss(model.forward(Var(batch.inputs), ctx), batch.targets, cfg);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw TrainingDiverged("training loss became " + std::to_string(value) + " at epoch " +
                               std::to_string(epoch) + ", step " +
                               std::to_string(result.steps + 1));
      }
      for (auto& p : params) p.zero_grad();
      backward(loss);
      adam_step(params, state);
      total += value * static_cast<double>(end - start);
      seen += end - start;
      if (++result.steps == cfg.train.max_steps) {
        out_of_steps = true;
        break;
      }
    }

    const auto& val_set = data.validation.empty() ? data.train : data.validation;
    EpochLog log{epoch, total / static_cast<double>(seen), dataset_loss(model, val_set, cfg),
                 result.steps};
    if (!std::isfinite(log.validation_loss)) {
      throw TrainingDiverged("validation loss became " + std::to_string(log.validation_loss) +
                             " at epoch " + std::to_string(epoch));
    }
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.validation_loss < result.best_validation) {
      result.best_validation = log.validation_loss;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : params) best.push_back(p.value());
      since_best = 0;
    } else if (++since_best >= cfg.train.patience) {
      result.stopped_early = true;
      break;
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) params[i].mutable_value() = best[i];
  return result;
}

std::string format_train_log(const std::vector<EpochLog>& epochs) {
  std::string out = "epoch,train_loss,validation_loss,steps\n";
  char buf[128];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu\n", e.epoch, e.train_loss,
                  e.validation_loss, e.steps);
    out += buf;
  }
  return out;
}

}  // namespace vitalcast::experiment
