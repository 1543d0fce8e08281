#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vitalcast::experiment {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,        // unexpected internal error
  kExitInvalidInput = 2,   // bad config, missing or malformed input file
  kExitMismatch = 3,       // checkpoint incompatible with config or request
  kExitDiverged = 4,       // non-finite training loss
};

class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

/// `flag` when given, else $VITALCAST_OUT_DIR, else "out".
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag);

/// Writes model.ckpt, train_log.csv and exclusions.log under `out`.
void cmd_train(const std::filesystem::path& config, const std::filesystem::path& out,
               std::ostream& log);

struct EvaluateRequest {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> config;
  std::optional<std::string> model;  // only "persistence" works without a checkpoint
  std::filesystem::path out;
};

/// Writes metrics.json, horizon_curve.csv, results_table.txt and
/// crossover.txt. A trained model is always reported next to persistence.
void cmd_evaluate(const EvaluateRequest& request, std::ostream& log);

struct ForecastRequest {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> model;
  std::filesystem::path input;  // CSV with hr, mbp and rr columns, one row per 5 minutes
  std::string target;
  std::optional<std::filesystem::path> out;
};

/// Emits `step,minutes_ahead,value` rows in physical units to `out` (or the
/// stream when no path is given).
void cmd_forecast(const ForecastRequest& request, std::ostream& out, std::ostream& log);

/// Writes vitals.csv and diagnoses.csv for `patients` synthetic patients.
void cmd_synth(std::size_t patients, std::uint64_t seed, const std::filesystem::path& out,
               std::ostream& log);

/// Merges metrics documents into one rendered table.
void cmd_table(const std::vector<std::filesystem::path>& metrics,
               const std::optional<std::filesystem::path>& out, std::ostream& stream);

/// Runs `body`, reporting any failure on `err` and mapping it to an exit code.
int run_command(const std::function<void()>& body, std::ostream& err);

}  // namespace vitalcast::experiment
