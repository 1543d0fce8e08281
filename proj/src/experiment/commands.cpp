#include "vitalcast/experiment/commands.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "vitalcast/data/synthetic.hpp"
#include "vitalcast/error.hpp"
#include "vitalcast/eval/metrics.hpp"
#include "vitalcast/experiment/table.hpp"
#include "vitalcast/experiment/trainer.hpp"
#include "vitalcast/io.hpp"
#include "vitalcast/models/checkpoint.hpp"

namespace vitalcast::experiment {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("VITALCAST_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

namespace {

constexpr const char* kCheckpointFile = "model.ckpt";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(kExitInvalidInput, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

models::Checkpoint read_checkpoint_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw CommandError(kExitInvalidInput, "checkpoint not found: " + path.string());
  }
  try {
    return models::load_checkpoint(path);
  } catch (const DataError& e) {
    throw CommandError(kExitInvalidInput, path.string() + ": " + e.what());
  }
}

// Rebuilds the trained model from a checkpoint's embedded configuration.
std::unique_ptr<models::ForecastModel> restore(const models::Checkpoint& ckpt,
                                               const ExperimentConfig& trained) {
  auto model = build_model(trained);
  try {
    models::restore_parameters(*model, ckpt);
  } catch (const ContractError& e) {
    throw CommandError(kExitMismatch, std::string("checkpoint does not fit its config: ") + e.what());
  }
  return model;
}

ExperimentConfig embedded_config(const models::Checkpoint& ckpt) {
  try {
    return parse_config(ckpt.config_text, "checkpoint config");
  } catch (const ConfigError& e) {
    throw CommandError(kExitInvalidInput, e.what());
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

void cmd_train(const fs::path& config, const fs::path& out, std::ostream& log) {
  const auto cfg = load_config(config);
  check_inputs(cfg);
  if (cfg.model.kind == "persistence") {
    throw CommandError(kExitInvalidInput, "key 'model': persistence has nothing to train");
  }
  const auto data = prepare_data(cfg);
  log << "data: " << data.train.size() << " train, " << data.validation.size()
      << " validation, " << data.test.size() << " test windows; " << data.exclusions.size()
      << " groups excluded\n";
  for (const auto& w : data.warnings) log << "warning: " << w << "\n";

  auto model = build_model(cfg);
  const auto result = train_model(*model, data, cfg, [&](const EpochLog& e) {
    log << "epoch " << e.epoch << " train " << fixed(e.train_loss, 6) << " validation "
        << fixed(e.validation_loss, 6) << " steps " << e.steps << "\n";
  });
  log << "best epoch " << result.best_epoch << " validation " << fixed(result.best_validation, 6)
      << (result.stopped_early ? " (early stop)" : "") << "; final training MSE "
      << fixed(dataset_mse(*model, data.train), 6) << "\n";

  models::save_checkpoint(out / kCheckpointFile, models::snapshot(*model, to_text(cfg)));
  write_file_atomic(out / "train_log.csv", format_train_log(result.epochs));
  write_file_atomic(out / "exclusions.log", data::format_exclusion_log(data.exclusions));
  log << "wrote " << (out / kCheckpointFile).string() << "\n";
}

void cmd_evaluate(const EvaluateRequest& request, std::ostream& log) {
  std::optional<models::Checkpoint> ckpt;
  std::optional<ExperimentConfig> trained;
  if (request.checkpoint) {
    ckpt = read_checkpoint_file(*request.checkpoint);
    trained = embedded_config(*ckpt);
  }
  ExperimentConfig cfg = request.config ? load_config(*request.config)
                                        : (trained ? *trained : ExperimentConfig{});
  check_inputs(cfg);

  std::unique_ptr<models::ForecastModel> model;
  std::string loss;
  if (trained) {
    if (request.model && *request.model != trained->model.kind) {
      throw CommandError(kExitMismatch, "--model " + *request.model + " but checkpoint holds " +
                                            trained->model.kind);
    }
    const auto diff = model_mismatches(*trained, cfg);
    if (!diff.empty()) {
      std::string keys;
      for (const auto& k : diff) keys += (keys.empty() ? "" : ", ") + k;
      throw CommandError(kExitMismatch, "checkpoint/config mismatch on: " + keys);
    }
    model = restore(*ckpt, *trained);
    loss = loss_name(trained->loss);
  } else {
    const std::string kind = request.model.value_or(cfg.model.kind);
    if (kind != "persistence") {
      throw CommandError(kExitInvalidInput, "model " + kind + " needs --checkpoint");
    }
    model = std::make_unique<models::PersistenceModel>(cfg.channels());
  }

  const auto data = prepare_data(cfg);
  std::vector<eval::EvalReport> reports;
  reports.push_back(eval::evaluate_model(
      *model, data.test, {model->kind(), cfg.target, model->kind() != "persistence" && cfg.covariates, loss}));
  if (model->kind() != "persistence") {
    const models::PersistenceModel persistence(cfg.channels());
    reports.push_back(eval::evaluate_model(persistence, data.test,
                                           {"persistence", cfg.target, false, ""}));
  }

  std::string crossings;
  const auto& baseline = reports.back();
  for (const auto& s : eval::compare_to_persistence(reports, baseline)) {
    crossings += s.label + "," + eval::describe(s) + "\n";
  }
  const fs::path& out = request.out;
  write_file_atomic(out / "metrics.json", eval::metrics_json(reports));
  write_file_atomic(out / "horizon_curve.csv", eval::horizon_curve_csv(reports));
  write_file_atomic(out / "results_table.txt", render_results_table(reports));
  write_file_atomic(out / "crossover.txt", crossings);
  for (const auto& r : reports) {
    log << r.key.label() << ": n=" << r.n_samples << " MSE " << fixed(r.mse, 6) << " (x1e4 "
        << fixed(r.mse_scaled, 4) << ") DTW " << fixed(r.dtw, 6) << "\n";
  }
  log << crossings;
}

namespace {

std::vector<std::vector<double>> read_window_csv(const fs::path& path,
                                                 const std::vector<data::Channel>& needed) {
  std::ifstream in(path);
  if (!in) throw CommandError(kExitInvalidInput, "cannot read input " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) header.push_back(cell);
  }
  std::vector<std::size_t> column;
  for (auto c : needed) {
    const auto it = std::find(header.begin(), header.end(), std::string(data::channel_name(c)));
    if (it == header.end()) {
      throw CommandError(kExitInvalidInput, path.string() + ": missing column '" +
                                                std::string(data::channel_name(c)) + "'");
    }
    column.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> series(needed.size());
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    for (std::size_t k = 0; k < needed.size(); ++k) {
      double v = 0.0;
      const std::string& s = column[k] < cells.size() ? cells[column[k]] : std::string();
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw CommandError(kExitInvalidInput, path.string() + ":" + std::to_string(number) +
                                                  ": bad value '" + s + "' in column " +
                                                  header[column[k]]);
      }
      series[k].push_back(v);
    }
  }
  return series;
}

}  // namespace

void cmd_forecast(const ForecastRequest& request, std::ostream& out, std::ostream& log) {
  const auto target = data::parse_channel(request.target);
  if (target == data::Channel::kRr) {
    throw CommandError(kExitInvalidInput, "--target must be hr or mbp");
  }
  std::unique_ptr<models::ForecastModel> model;
  bool covariates = false;
  if (request.checkpoint) {
    const auto ckpt = read_checkpoint_file(*request.checkpoint);
    const auto trained = embedded_config(ckpt);
    if (trained.target != target) {
      throw CommandError(kExitMismatch, "checkpoint forecasts " +
                                            std::string(data::channel_name(trained.target)) +
                                            ", not " + request.target);
    }
    covariates = trained.covariates;
    model = restore(ckpt, trained);
  } else if (request.model.value_or("") == "persistence") {
    model = std::make_unique<models::PersistenceModel>(1);
  } else {
    throw CommandError(kExitInvalidInput, "forecast needs --checkpoint or --model persistence");
  }

  const auto channels = data::input_channels(target, covariates);
  const auto series = read_window_csv(request.input, channels);
  if (series[0].size() < data::kInputSteps) {
    throw CommandError(kExitInvalidInput, request.input.string() + " has " +
                                              std::to_string(series[0].size()) +
                                              " rows; at least 72 are required");
  }
  const data::ScalingSpec spec;
  Tensor window({1, channels.size() * data::kInputSteps});
  const std::size_t first = series[0].size() - data::kInputSteps;
  std::size_t clamped = 0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (std::size_t t = 0; t < data::kInputSteps; ++t) {
      bool outside = false;
      window[c * data::kInputSteps + t] = data::scale(series[c][first + t], channels[c], spec, &outside);
      clamped += outside ? 1 : 0;
    }
  }
  if (clamped > 0) log << "warning: " << clamped << " input values clamped to the scaling range\n";

  const Tensor forecast = model->predict(window);
  std::string csv = "step,minutes_ahead,value\n";
  for (std::size_t h = 0; h < data::kHorizon; ++h) {
    csv += std::to_string(h + 1) + "," + std::to_string(5 * (h + 1)) + "," +
           fixed(data::unscale(forecast[h], target, spec), 12) + "\n";
  }
  if (request.out) {
    write_file_atomic(*request.out, csv);
  } else {
    out << csv;
  }
}

void cmd_synth(std::size_t patients, std::uint64_t seed, const fs::path& out, std::ostream& log) {
  if (patients == 0) throw CommandError(kExitInvalidInput, "--patients must be positive");
  const auto raw = data::to_raw_records(data::generate_synthetic(patients, seed));
  write_file_atomic(out / "vitals.csv", data::format_vitals_csv(raw.vitals));
  write_file_atomic(out / "diagnoses.csv", data::format_diagnosis_csv(raw.diagnoses));
  log << "wrote " << raw.diagnoses.size() << " groups (" << raw.vitals.size() << " rows) to "
      << out.string() << "\n";
}

void cmd_table(const std::vector<fs::path>& metrics, const std::optional<fs::path>& out,
               std::ostream& stream) {
  std::vector<eval::EvalReport> all;
  for (const auto& path : metrics) {
    auto reports = eval::parse_metrics_json(read_text(path));
    all.insert(all.end(), reports.begin(), reports.end());
  }
  const auto table = render_results_table(all);
  if (out) write_file_atomic(*out, table);
  stream << table;
}

int run_command(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const TrainingDiverged& e) {
    err << "error: training aborted: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace vitalcast::experiment
