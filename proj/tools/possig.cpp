// Command-line driver for the possession analytics pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>

#include "possig/errors.hpp"
#include "possig/pipeline.hpp"
#include "possig/whatif.hpp"

namespace {

using possig::RunConfig;

// Flags shared by every subcommand; each overrides the config file when given.
struct Overrides {
  std::string config;
  std::string work_dir;
  std::string input;
  std::string zones;
  std::string outcomes;
  std::vector<int> n_r;
  int value_n_r = 0;
  std::size_t sig_order = 0;
  double lambda = 0.0;
  std::size_t hidden = 0;
  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
  double train_ratio = 0.0;
  double validation_ratio = 0.0;
  bool report_mse = false;
  bool oracle = false;
  std::string host;
  int port = 0;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app, const std::string& command) {
    opts["config"] = app->add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    opts["work_dir"] = app->add_option("-w,--work-dir", work_dir, "Directory for all artifacts");
    if (command == "ingest")
      opts["input"] = app->add_option("-i,--input", input, "Raw NDJSON events (default: <work-dir>/raw_events.ndjson)");
    if (command == "eval" || command == "tune" || command == "serve")
      opts["zones"] = app->add_option("--zones", zones, "Zone partition JSON (default: built-in 8 zones)");
    if (command == "report")
      opts["outcomes"] = app->add_option("--outcomes", outcomes, "CSV with match_id,team_id,goals[,external_xg]");
    if (command == "build" || command == "train" || command == "eval" || command == "tune")
      opts["n_r"] = app->add_option("--n-r", n_r, "Recent-action counts to process (3..7)");
    if (command == "value" || command == "serve")
      opts["value_n_r"] = app->add_option("--n-r", value_n_r, "Checkpoint n_r used for valuation");
    if (command == "build" || command == "train" || command == "eval" || command == "value" || command == "serve")
      opts["sig_order"] = app->add_option("-M,--sig-order", sig_order, "Signature truncation order");
    if (command == "train" || command == "eval" || command == "tune") {
      opts["lambda"] = app->add_option("--lambda", lambda, "Weight of the cross-entropy term");
      opts["train_ratio"] = app->add_option("--train-ratio", train_ratio, "Share of matches used for training");
      opts["validation_ratio"] =
          app->add_option("--validation-ratio", validation_ratio, "Share of training matches held out for validation");
      opts["seed"] = app->add_option("-s,--seed", seed, "Random seed for splits and initialization");
    }
    if (command == "synth") opts["seed"] = app->add_option("-s,--seed", seed, "Random seed");
    if (command == "train" || command == "tune") {
      opts["hidden"] = app->add_option("--hidden", hidden, "Hidden layer width");
      opts["batch_size"] = app->add_option("--batch-size", batch_size, "Mini-batch size");
      opts["epochs"] = app->add_option("--epochs", epochs, "Training epochs");
      opts["learning_rate"] = app->add_option("--lr", learning_rate, "Adam learning rate");
    }
    if (command == "eval" || command == "tune")
      opts["report_mse"] = app->add_flag("--report-mse", report_mse, "Report squared location error instead of RMSE");
    if (command == "eval") opts["oracle"] = app->add_flag("--oracle", oracle, "Score the true targets instead of a model");
    if (command == "serve") {
      opts["host"] = app->add_option("--host", host, "Bind address");
      opts["port"] = app->add_option("-p,--port", port, "Port");
    }
  }

  bool given(const std::string& k) const {
    auto it = opts.find(k);
    return it != opts.end() && it->second->count() > 0;
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : RunConfig::load(config);
    if (given("work_dir")) c.work_dir = work_dir;
    if (given("input")) c.raw_events = input;
    if (given("zones")) c.zones = zones;
    if (given("outcomes")) c.outcomes = outcomes;
    if (given("n_r")) c.n_r = n_r;
    if (given("value_n_r")) c.value_n_r = value_n_r;
    if (given("sig_order")) {
      c.sig_order = sig_order;
      c.tune.sig_order = {sig_order};
    }
    if (given("lambda")) {
      c.lambda = lambda;
      c.tune.lambda = {lambda};
    }
    if (given("hidden")) {
      c.hidden = hidden;
      c.tune.hidden = {hidden};
    }
    if (given("batch_size")) {
      c.batch_size = batch_size;
      c.tune.batch_size = {batch_size};
    }
    if (given("epochs")) c.epochs = epochs;
    if (given("learning_rate")) c.learning_rate = learning_rate;
    if (given("seed")) c.seed = seed;
    if (given("train_ratio")) c.train_ratio = train_ratio;
    if (given("validation_ratio")) c.validation_ratio = validation_ratio;
    if (given("report_mse")) c.report_mse = report_mse;
    if (given("host")) c.host = host;
    if (given("port")) c.port = port;
    return c;
  }
};

int serve(const RunConfig& cfg) {
  cfg.validate();
  auto model = possig::load_served_model(cfg.checkpoint_path(cfg.value_n_r).string(), cfg.path("xg.json").string(),
                                         cfg.path("xt.json").string(), cfg.zones.string());
  possig::WhatIfService service(std::move(model));
  possig::ServerOptions opts;
  opts.host = cfg.host;
  opts.port = cfg.port;
  std::cerr << "serving /v1 on http://" << opts.host << ':' << opts.port << '\n';
  if (!possig::run_server(service, opts)) throw possig::DataError("cannot bind " + opts.host + ":" + std::to_string(opts.port));
  return possig::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Possession signature analytics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", possig::version_string());

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "Write a synthetic raw event corpus"},
      {"ingest", "Validate raw events and write canonical events"},
      {"build", "Build sample datasets for each n_r"},
      {"train", "Train one predictor per n_r"},
      {"eval", "Evaluate checkpoints on the test matches"},
      {"value", "Fit xG/xT and value every possession"},
      {"report", "Aggregate per team and match and correlate"},
      {"tune", "Train and evaluate a hyperparameter grid"},
      {"serve", "Serve the what-if HTTP API"},
  };
  std::map<std::string, std::unique_ptr<Overrides>> flags;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    flags[name] = std::make_unique<Overrides>();
    flags[name]->attach(sub, name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? possig::kExitOk : possig::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto& f = *flags.at(command);
    const auto cfg = f.resolve();
    if (command == "serve") return serve(cfg);
    possig::run_command(command, cfg, std::cout, f.oracle);
    return possig::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return possig::exit_code_for(e);
  }
}
