#include <CLI11.hpp>

#include <iostream>

#include "vitalcast/experiment/commands.hpp"

namespace fs = std::filesystem;
using namespace vitalcast::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Vital-sign forecasting experiments"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<fs::path> out;
  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", config, "experiment config")->required();
  train->add_option("--out", out, "output directory (default $VITALCAST_OUT_DIR or ./out)");

  EvaluateRequest eval_req;
  std::optional<fs::path> eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint or persistence on the test split");
  evaluate->add_option("--checkpoint", eval_req.checkpoint, "checkpoint written by train");
  evaluate->add_option("--config", eval_req.config, "experiment config (data and model)");
  evaluate->add_option("--model", eval_req.model, "persistence, to run without a checkpoint");
  evaluate->add_option("--out", eval_out, "output directory");

  ForecastRequest fc_req;
  auto* forecast = app.add_subcommand("forecast", "forecast 36 steps from a 72-step window");
  forecast->add_option("--checkpoint", fc_req.checkpoint, "checkpoint written by train");
  forecast->add_option("--model", fc_req.model, "persistence, to run without a checkpoint");
  forecast->add_option("--input", fc_req.input, "CSV with hr, mbp, rr columns")->required();
  forecast->add_option("--target", fc_req.target, "hr or mbp")->required();
  forecast->add_option("--out", fc_req.out, "write the forecast here instead of stdout");

  std::size_t patients = 200;
  std::uint64_t seed = 7;
  std::optional<fs::path> synth_out;
  auto* synth = app.add_subcommand("synth", "write synthetic vitals and diagnosis CSVs");
  synth->add_option("--patients", patients, "number of patients");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory");

  std::vector<fs::path> metrics;
  std::optional<fs::path> table_out;
  auto* table = app.add_subcommand("table", "render metrics.json files as one results table");
  table->add_option("metrics", metrics, "metrics.json files")->required();
  table->add_option("--out", table_out, "also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  return run_command(
      [&] {
        if (*train) {
          cmd_train(config, resolve_out_dir(out), std::cerr);
        } else if (*evaluate) {
          eval_req.out = resolve_out_dir(eval_out);
          cmd_evaluate(eval_req, std::cerr);
        } else if (*forecast) {
          cmd_forecast(fc_req, std::cout, std::cerr);
        } else if (*synth) {
          cmd_synth(patients, seed, resolve_out_dir(synth_out), std::cerr);
        } else if (*table) {
          cmd_table(metrics, table_out, std::cout);
        }
      },
      std::cerr);
}
