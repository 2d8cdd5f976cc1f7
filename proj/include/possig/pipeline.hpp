#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "possig/metrics.hpp"
#include "possig/predictor.hpp"

namespace possig {

struct TuneGrid {
  std::vector<double> lambda = {1.0};
  std::vector<std::size_t> hidden = {256};
  std::vector<std::size_t> batch_size = {4};
  std::vector<std::size_t> sig_order = {3};
};

/// Settings shared by all subcommands. Loaded from JSON; unknown keys are
/// rejected.
struct RunConfig {
  std::filesystem::path work_dir = "possig_out";
  std::filesystem::path raw_events;  // ingest input
  std::filesystem::path zones;       // optional partition file
  std::filesystem::path outcomes;    // optional outcomes CSV for report
  std::vector<int> n_r = {3, 4, 5, 6, 7};
  int value_n_r = 3;
  std::size_t sig_order = 3;
  double lambda = 1.0;
  std::size_t hidden = 256;
  std::size_t hidden_layers = 2;
  std::size_t emb_dim = 16;
  std::size_t batch_size = 4;
  std::size_t epochs = 20;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  double train_ratio = 0.8;
  double validation_ratio = 0.1;
  bool report_mse = false;
  /// Competitions left out when fitting xG/xT (the evaluated league).
  std::vector<std::string> xg_exclude_competitions;
  TuneGrid tune;
  std::string host = "127.0.0.1";
  int port = 8080;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Checks ranges; with `for_tuning` also checks the grid against the
  /// supported hyperparameter domain. Throws ContractError.
  void validate(bool for_tuning = false) const;
  /// SHA-256 of the settings, excluding file paths.
  std::string hash() const;

  std::filesystem::path path(const std::string& name) const { return work_dir / name; }
  std::filesystem::path events_path() const { return path("events.ndjson"); }
  std::filesystem::path samples_path(int n_r) const;
  std::filesystem::path checkpoint_path(int n_r) const;
};

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Runs a subcommand (ingest, build, train, eval, value, report, tune,
/// synth). Outputs are written to temporaries and renamed into place only
/// when the whole command succeeds. Progress and evaluation rows go to
/// `out`. Errors propagate as ContractError / DataError / NumericError.
void run_command(const std::string& command, const RunConfig& config, std::ostream& out, bool oracle = false);

/// Maps an exception from run_command to an exit status.
int exit_code_for(const std::exception& e);

/// Train/validation/test split of a dataset by match.
struct SplitSamples {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};
SplitSamples split_samples(const std::vector<Sample>& samples, std::uint64_t seed, double train_ratio,
                           double validation_ratio);

PredictorConfig model_config(const RunConfig& config, std::size_t sig_order, std::size_t hidden);

/// Train on the split and evaluate on its test part; shared by train+eval
/// and tune.
struct TrainEvalResult {
  TrainResult training;
  EvalReport report;
};
TrainEvalResult train_and_evaluate(const SplitSamples& split, const PredictorConfig& model_cfg,
                                   const TrainConfig& train_cfg, const PitchPartition& zones, bool report_mse);

/// Evaluation row: n_r, test loss, location error, CEL, Brier, KL.
std::string table_row(int n_r, const EvalReport& r);
std::string table_header(bool report_mse);

/// Build identifier baked in at compile time.
std::string version_string();

}  // namespace possig
