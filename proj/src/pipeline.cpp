#include "possig/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "possig/errors.hpp"
#include "possig/events.hpp"
#include "possig/lyndon.hpp"
#include "possig/report.hpp"
#include "possig/synthetic.hpp"
#include "possig/valuation.hpp"
#include "possig/whatif.hpp"
#include "possig/xg.hpp"
#include "possig/xt.hpp"

#ifndef POSSIG_VERSION
#define POSSIG_VERSION "unknown"
#endif

namespace possig {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects a command's outputs as temporaries; commit() moves them into
// place, otherwise they are deleted.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : files_) fs::remove(tmp, ec);
  }

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path final_path = dir_ / name;
    const fs::path tmp = dir_ / (name + ".partial");
    files_.emplace_back(tmp, final_path);
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + final_path.string());
    return out;
  }

  // For writers that take a path.
  std::string reserve(const std::string& name) {
    fs::create_directories(dir_);
    const fs::path tmp = dir_ / (name + ".partial");
    files_.emplace_back(tmp, dir_ / name);
    return tmp.string();
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : files_) out.push_back(f.second.filename().string());
    return out;
  }

  void commit() {
    for (const auto& [tmp, final_path] : files_) {
      if (!fs::exists(tmp)) throw DataError("missing output " + final_path.string());
      fs::rename(tmp, final_path);
    }
    committed_ = true;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, fs::path>> files_;
  bool committed_ = false;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + ": invalid JSON");
  return j;
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

std::vector<MatchEvent> load_events(const RunConfig& cfg) {
  const auto path = cfg.events_path();
  if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run ingest first)");
  auto res = ingest_events_file(path.string());
  if (!res.rejected.empty())
    throw DataError(path.string() + " line " + std::to_string(res.rejected.front().line) + ": " +
                    res.rejected.front().reason);
  return std::move(res.events);
}

PitchPartition zones_of(const RunConfig& cfg) {
  return cfg.zones.empty() ? default_zones() : PitchPartition::load(cfg.zones.string());
}

TrainConfig train_config(const RunConfig& cfg, double lambda, std::size_t batch_size) {
  TrainConfig t;
  t.epochs = cfg.epochs;
  t.batch_size = batch_size;
  t.learning_rate = cfg.learning_rate;
  t.lambda = lambda;
  t.seed = cfg.seed;
  return t;
}

void update_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& outputs,
                     OutputSet& set) {
  const auto path = cfg.path("manifest.json");
  json m = fs::exists(path) ? read_json_file(path) : json::object();
  m["config_hash"] = cfg.hash();
  m["seed"] = cfg.seed;
  m["version"] = version_string();
  m["commands"][command] = {{"config_hash", cfg.hash()}, {"outputs", outputs}};
  auto out = set.open("manifest.json");
  write_json(out, m);
}

void write_train_log(std::ostream& out, const TrainResult& r) {
  out << "epoch,train_loss,train_rmse,train_cel,validation_loss,validation_rmse,validation_cel,best\n";
  for (const auto& e : r.log) {
    out << e.epoch << ',' << format_number(e.train.total) << ',' << format_number(e.train.rmse) << ','
        << format_number(e.train.cel) << ',';
    if (e.has_validation)
      out << format_number(e.validation.total) << ',' << format_number(e.validation.rmse) << ','
          << format_number(e.validation.cel);
    else
      out << "NA,NA,NA";
    out << ',' << (e.epoch == r.best_epoch ? 1 : 0) << '\n';
  }
}

std::string eval_csv_header() { return "n_r,test_loss,location_error,cel,brier,kl,n_samples"; }

std::string eval_csv_row(int n_r, const EvalReport& r) {
  std::ostringstream s;
  s << n_r << ',' << format_number(r.test_loss) << ',' << format_number(r.location_error) << ','
    << format_number(r.cel) << ',' << format_number(r.brier) << ',' << format_number(r.kl) << ',' << r.n_samples;
  return s.str();
}

// ---- commands ------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  OutputSet set(cfg.work_dir);
  SyntheticConfig sc;
  sc.seed = cfg.seed;
  {
    auto f = set.open("raw_events.ndjson");
    write_synthetic_events(f, sc);
  }
  set.commit();
  out << "synth: wrote " << cfg.path("raw_events.ndjson").string() << '\n';
}

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  const fs::path input = cfg.raw_events.empty() ? cfg.path("raw_events.ndjson") : cfg.raw_events;
  if (!fs::exists(input)) throw DataError("missing input " + input.string());
  const auto res = ingest_events_file(input.string());
  if (res.events.empty()) throw DataError(input.string() + ": no valid events");

  OutputSet set(cfg.work_dir);
  {
    auto f = set.open("events.ndjson");
    export_events(f, res.events);
  }
  {
    auto f = set.open("ingest_rejected.csv");
    f << "line,reason\n";
    for (const auto& r : res.rejected) f << r.line << ",\"" << r.reason << "\"\n";
  }
  update_manifest(cfg, "ingest", {"events.ndjson", "ingest_rejected.csv"}, set);
  set.commit();
  for (const auto& w : res.warnings) out << "warning: " << w << '\n';
  out << "ingest: " << res.events.size() << " events, " << res.rejected.size() << " rejected\n";
}

void cmd_build(const RunConfig& cfg, std::ostream& out) {
  const auto events = load_events(cfg);
  OutputSet set(cfg.work_dir);
  std::vector<std::string> names;
  for (int n_r : cfg.n_r) {
    Dataset ds{n_r, cfg.sig_order, build_dataset(events, n_r, cfg.sig_order)};
    const auto name = cfg.samples_path(n_r).filename().string();
    save_dataset(set.reserve(name), ds);
    names.push_back(name);
    out << "build: n_r=" << n_r << " samples=" << ds.samples.size() << '\n';
  }
  update_manifest(cfg, "build", names, set);
  set.commit();
}

Dataset load_samples(const RunConfig& cfg, int n_r) {
  const auto path = cfg.samples_path(n_r);
  if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run build first)");
  auto ds = load_dataset(path.string());
  if (ds.n_r != n_r) throw DataError(path.string() + ": n_r mismatch");
  if (ds.sig_order != cfg.sig_order) throw DataError(path.string() + ": signature order differs from config");
  return ds;
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  OutputSet set(cfg.work_dir);
  std::vector<std::string> names;
  for (int n_r : cfg.n_r) {
    const auto ds = load_samples(cfg, n_r);
    const auto split = split_samples(ds.samples, cfg.seed, cfg.train_ratio, cfg.validation_ratio);
    if (split.train.empty()) throw DataError("n_r=" + std::to_string(n_r) + ": no training samples");
    const auto result = train(split.train, split.validation, model_config(cfg, cfg.sig_order, cfg.hidden),
                              train_config(cfg, cfg.lambda, cfg.batch_size));
    if (result.aborted) throw NumericError("n_r=" + std::to_string(n_r) + ": " + result.message);

    Checkpoint ck{result.params, n_r, cfg.sig_order, cfg.lambda, cfg.seed};
    const auto ck_name = cfg.checkpoint_path(n_r).filename().string();
    save_checkpoint(set.reserve(ck_name), ck);
    const auto log_name = "trainlog_nr" + std::to_string(n_r) + ".csv";
    {
      auto f = set.open(log_name);
      write_train_log(f, result);
    }
    names.push_back(ck_name);
    names.push_back(log_name);
    const auto& best = result.log.at(result.best_epoch - 1);
    out << "train: n_r=" << n_r << " best_epoch=" << result.best_epoch
        << " loss=" << format_number(best.has_validation ? best.validation.total : best.train.total) << '\n';
  }
  update_manifest(cfg, "train", names, set);
  set.commit();
}

void cmd_eval(const RunConfig& cfg, std::ostream& out, bool oracle) {
  const auto zones = zones_of(cfg);
  OutputSet set(cfg.work_dir);
  std::vector<std::string> names;
  std::ostringstream table;
  table << eval_csv_header() << '\n';
  out << table_header(cfg.report_mse) << '\n';
  for (int n_r : cfg.n_r) {
    const auto ds = load_samples(cfg, n_r);
    const auto split = split_samples(ds.samples, cfg.seed, cfg.train_ratio, cfg.validation_ratio);
    EvalReport rep;
    if (oracle) {
      rep = evaluate_predictions(oracle_predictions(split.test), split.test, zones, cfg.lambda, cfg.report_mse);
    } else {
      const auto path = cfg.checkpoint_path(n_r);
      if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run train first)");
      const auto ck = load_checkpoint(path.string());
      rep = evaluate(ck.params, split.test, zones, ck.lambda, cfg.report_mse);
    }
    const auto name = "eval_nr" + std::to_string(n_r) + ".json";
    {
      auto f = set.open(name);
      auto j = eval_report_to_json(rep);
      j["n_r"] = n_r;
      j["predictor"] = oracle ? "oracle" : "model";
      write_json(f, j);
    }
    names.push_back(name);
    table << eval_csv_row(n_r, rep) << '\n';
    out << table_row(n_r, rep) << '\n';
  }
  {
    auto f = set.open("eval_table.csv");
    f << table.str();
  }
  names.push_back("eval_table.csv");
  update_manifest(cfg, "eval", names, set);
  set.commit();
}

void cmd_value(const RunConfig& cfg, std::ostream& out) {
  const auto events = load_events(cfg);
  const std::set<std::string> excluded(cfg.xg_exclude_competitions.begin(), cfg.xg_exclude_competitions.end());
  std::vector<MatchEvent> fit_events;
  for (const auto& e : events)
    if (!excluded.count(e.competition)) fit_events.push_back(e);
  std::vector<Possession> possessions;
  for (const auto& m : group_by_match(fit_events)) {
    auto ps = segment_possessions(m);
    std::move(ps.begin(), ps.end(), std::back_inserter(possessions));
  }
  const auto acts = extract_actions(possessions);
  if (acts.shots.size() < kMinShots)
    throw DataError("value: xG needs at least " + std::to_string(kMinShots) + " shots, found " +
                    std::to_string(acts.shots.size()));
  const auto xg = fit_xg(acts.shots);
  if (!xg.warning.empty()) out << "warning: " << xg.warning << '\n';
  ValuationModels models;
  models.xg = xg.model;
  models.xt = fit_xt(acts.moves, acts.shots, xg.model, Grid{});

  const auto ck_path = cfg.checkpoint_path(cfg.value_n_r);
  if (!fs::exists(ck_path)) throw DataError("missing " + ck_path.string() + " (run train first)");
  const auto ck = load_checkpoint(ck_path.string());
  const auto valued = value_events(events, ck, models);

  OutputSet set(cfg.work_dir);
  {
    auto f = set.open("xg.json");
    auto j = xg.model.to_json();
    j["std_errors"] = xg.std_errors;
    j["n_shots"] = acts.shots.size();
    write_json(f, j);
  }
  {
    auto f = set.open("xt.json");
    f << models.xt.to_json().dump() << '\n';
  }
  {
    auto f = set.open("valued_possessions.csv");
    write_valued_possessions_csv(f, valued);
  }
  {
    auto f = set.open("valued_actions.csv");
    write_valued_actions_csv(f, valued);
  }
  update_manifest(cfg, "value", {"xg.json", "xt.json", "valued_possessions.csv", "valued_actions.csv"}, set);
  set.commit();
  out << "value: " << valued.size() << " possessions valued with n_r=" << cfg.value_n_r << '\n';
}

std::vector<ValuedPossession> read_valued_possessions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing " + path.string() + " (run value first)");
  std::string line;
  std::getline(in, line);
  std::vector<ValuedPossession> out;
  std::size_t line_no = 1;
  auto num = [&](const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw DataError(path.string() + " line " + std::to_string(line_no) + ": bad number");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw DataError(path.string() + " line " + std::to_string(line_no) + ": expected 11 fields");
    ValuedPossession v;
    v.match_id = f[0];
    v.team_id = f[1];
    v.possession = static_cast<std::size_t>(num(f[2]));
    v.lpv_pred = num(f[4]);
    v.lpv_obs = num(f[5]);
    v.hpus_pred = num(f[6]);
    v.hpus_obs = num(f[7]);
    v.poss_util_pred = num(f[8]);
    v.poss_util_obs = num(f[9]);
    if (f[10] != "NA") v.rel_diff = num(f[10]);
    out.push_back(std::move(v));
  }
  return out;
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto events = load_events(cfg);
  const auto valued = read_valued_possessions(cfg.path("valued_possessions.csv"));
  OutcomeTable outcomes;
  if (!cfg.outcomes.empty()) {
    std::ifstream in(cfg.outcomes);
    if (!in) throw DataError("cannot open " + cfg.outcomes.string());
    outcomes = read_outcomes(in);
  }
  const auto rep = aggregate_and_correlate(valued, events, cfg.outcomes.empty() ? nullptr : &outcomes);

  OutputSet set(cfg.work_dir);
  {
    auto f = set.open("team_match.csv");
    write_team_match_csv(f, rep.rows);
  }
  {
    auto f = set.open("correlations.csv");
    write_correlation_csv(f, rep.same_match);
  }
  {
    auto f = set.open("future_correlations.csv");
    write_correlation_csv(f, rep.next_match);
  }
  update_manifest(cfg, "report", {"team_match.csv", "correlations.csv", "future_correlations.csv"}, set);
  set.commit();
  out << "report: " << rep.rows.size() << " team-match rows\n";
}

void cmd_tune(const RunConfig& cfg, std::ostream& out) {
  const auto events = load_events(cfg);
  const auto zones = zones_of(cfg);

  struct Row {
    double lambda;
    std::size_t hidden, batch, order;
    int n_r;
    EvalReport rep;
  };
  std::vector<Row> rows;
  for (std::size_t order : cfg.tune.sig_order) {
    for (int n_r : cfg.n_r) {
      const auto samples = build_dataset(events, n_r, order);
      const auto split = split_samples(samples, cfg.seed, cfg.train_ratio, cfg.validation_ratio);
      if (split.train.empty()) throw DataError("n_r=" + std::to_string(n_r) + ": no training samples");
      for (double lambda : cfg.tune.lambda)
        for (std::size_t hidden : cfg.tune.hidden)
          for (std::size_t batch : cfg.tune.batch_size) {
            const auto r = train_and_evaluate(split, model_config(cfg, order, hidden),
                                              train_config(cfg, lambda, batch), zones, cfg.report_mse);
            if (r.training.aborted) throw NumericError("tune: " + r.training.message);
            rows.push_back({lambda, hidden, batch, order, n_r, r.report});
            out << "tune: lambda=" << format_number(lambda) << " hidden=" << hidden << " batch=" << batch
                << " M=" << order << " n_r=" << n_r << " loss=" << format_number(r.report.test_loss) << '\n';
          }
    }
  }

  OutputSet set(cfg.work_dir);
  {
    auto f = set.open("tune_results.csv");
    f << "lambda,hidden,batch_size,sig_order," << eval_csv_header() << '\n';
    for (const auto& r : rows)
      f << format_number(r.lambda) << ',' << r.hidden << ',' << r.batch << ',' << r.order << ','
        << eval_csv_row(r.n_r, r.rep) << '\n';
  }
  {
    // mean scores per value of each hyperparameter and n_r
    auto f = set.open("tune_summary.csv");
    f << "parameter,value,n_r,runs,test_loss,location_error,cel,brier,kl\n";
    auto summarize = [&](const std::string& name, auto key) {
      std::map<std::pair<std::string, int>, std::vector<const Row*>> groups;
      std::vector<std::string> order_seen;
      for (const auto& r : rows) {
        const std::string v = key(r);
        if (std::find(order_seen.begin(), order_seen.end(), v) == order_seen.end()) order_seen.push_back(v);
        groups[{v, r.n_r}].push_back(&r);
      }
      for (const auto& v : order_seen)
        for (int n_r : cfg.n_r) {
          const auto& g = groups[{v, n_r}];
          if (g.empty()) continue;
          double m[5] = {0, 0, 0, 0, 0};
          for (const auto* r : g) {
            m[0] += r->rep.test_loss;
            m[1] += r->rep.location_error;
            m[2] += r->rep.cel;
            m[3] += r->rep.brier;
            m[4] += r->rep.kl;
          }
          f << name << ',' << v << ',' << n_r << ',' << g.size();
          for (double x : m) f << ',' << format_number(x / static_cast<double>(g.size()));
          f << '\n';
        }
    };
    summarize("lambda", [](const Row& r) { return format_number(r.lambda); });
    summarize("sig_order", [](const Row& r) { return std::to_string(r.order); });
    summarize("batch_size", [](const Row& r) { return std::to_string(r.batch); });
    summarize("hidden", [](const Row& r) { return std::to_string(r.hidden); });
  }
  update_manifest(cfg, "tune", {"tune_results.csv", "tune_summary.csv"}, set);
  set.commit();
}

}  // namespace

// ---- config --------------------------------------------------------------

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  static const std::set<std::string> known = {
      "work_dir", "raw_events", "zones", "outcomes", "n_r", "value_n_r", "sig_order", "lambda", "hidden",
      "hidden_layers", "emb_dim", "batch_size", "epochs", "learning_rate", "seed", "train_ratio",
      "validation_ratio", "report_mse", "xg_exclude_competitions", "tune", "host", "port"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ContractError("config: unknown key '" + k + "'");
  RunConfig c;
  try {
    auto path_of = [&](const char* k, fs::path& dst) {
      if (j.contains(k)) dst = j.at(k).get<std::string>();
    };
    path_of("work_dir", c.work_dir);
    path_of("raw_events", c.raw_events);
    path_of("zones", c.zones);
    path_of("outcomes", c.outcomes);
    if (j.contains("n_r")) {
      if (j["n_r"].is_array())
        c.n_r = j["n_r"].get<std::vector<int>>();
      else
        c.n_r = {j["n_r"].get<int>()};
    }
    c.value_n_r = j.value("value_n_r", c.n_r.empty() ? 3 : c.n_r.front());
    c.sig_order = j.value("sig_order", c.sig_order);
    c.lambda = j.value("lambda", c.lambda);
    c.hidden = j.value("hidden", c.hidden);
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.emb_dim = j.value("emb_dim", c.emb_dim);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.train_ratio = j.value("train_ratio", c.train_ratio);
    c.validation_ratio = j.value("validation_ratio", c.validation_ratio);
    c.report_mse = j.value("report_mse", c.report_mse);
    if (j.contains("xg_exclude_competitions"))
      c.xg_exclude_competitions = j["xg_exclude_competitions"].get<std::vector<std::string>>();
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.tune.lambda = {c.lambda};
    c.tune.hidden = {c.hidden};
    c.tune.batch_size = {c.batch_size};
    c.tune.sig_order = {c.sig_order};
    if (j.contains("tune")) {
      const auto& t = j["tune"];
      for (const auto& [k, v] : t.items())
        if (k != "lambda" && k != "hidden" && k != "batch_size" && k != "sig_order")
          throw ContractError("config: unknown tune key '" + k + "'");
      if (t.contains("lambda")) c.tune.lambda = t["lambda"].get<std::vector<double>>();
      if (t.contains("hidden")) c.tune.hidden = t["hidden"].get<std::vector<std::size_t>>();
      if (t.contains("batch_size")) c.tune.batch_size = t["batch_size"].get<std::vector<std::size_t>>();
      if (t.contains("sig_order")) c.tune.sig_order = t["sig_order"].get<std::vector<std::size_t>>();
    }
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ContractError(path.string() + ": invalid JSON");
  return from_json(j);
}

json RunConfig::to_json() const {
  return {{"work_dir", work_dir.string()},
          {"raw_events", raw_events.string()},
          {"zones", zones.string()},
          {"outcomes", outcomes.string()},
          {"n_r", n_r},
          {"value_n_r", value_n_r},
          {"sig_order", sig_order},
          {"lambda", lambda},
          {"hidden", hidden},
          {"hidden_layers", hidden_layers},
          {"emb_dim", emb_dim},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"seed", seed},
          {"train_ratio", train_ratio},
          {"validation_ratio", validation_ratio},
          {"report_mse", report_mse},
          {"xg_exclude_competitions", xg_exclude_competitions},
          {"tune",
           {{"lambda", tune.lambda},
            {"hidden", tune.hidden},
            {"batch_size", tune.batch_size},
            {"sig_order", tune.sig_order}}},
          {"host", host},
          {"port", port}};
}

void RunConfig::validate(bool for_tuning) const {
  require(!n_r.empty(), "config: n_r list is empty");
  for (int n : n_r) require(n >= kMinRecent && n <= kMaxRecent, "config: n_r must be in [3, 7]");
  require(value_n_r >= kMinRecent && value_n_r <= kMaxRecent, "config: value_n_r must be in [3, 7]");
  require(sig_order >= 1 && sig_order <= 6, "config: sig_order must be in [1, 6]");
  require(lambda >= 0.0, "config: lambda must be non-negative");
  require(hidden >= 1 && hidden_layers >= 1 && emb_dim >= 1, "config: layer sizes must be positive");
  require(batch_size >= 1 && epochs >= 1, "config: batch_size and epochs must be positive");
  require(learning_rate > 0.0, "config: learning_rate must be positive");
  require(train_ratio > 0.0 && train_ratio < 1.0, "config: train_ratio must be in (0, 1)");
  require(validation_ratio >= 0.0 && validation_ratio < 1.0, "config: validation_ratio must be in [0, 1)");
  require(port > 0 && port < 65536, "config: port out of range");
  if (!for_tuning) return;
  auto in = [](auto v, std::initializer_list<decltype(v)> dom) {
    return std::find(dom.begin(), dom.end(), v) != dom.end();
  };
  require(!tune.lambda.empty() && !tune.hidden.empty() && !tune.batch_size.empty() && !tune.sig_order.empty(),
          "tune: empty grid axis");
  for (double v : tune.lambda) require(in(v, {1.0, 5.0}), "tune: lambda must be one of {1, 5}");
  for (auto v : tune.hidden) require(in(v, {64, 128, 256}), "tune: hidden must be one of {64, 128, 256}");
  for (auto v : tune.batch_size) require(in(v, {4, 10, 32}), "tune: batch_size must be one of {4, 10, 32}");
  for (auto v : tune.sig_order) require(in(v, {3, 4}), "tune: sig_order must be one of {3, 4}");
}

std::string RunConfig::hash() const {
  json j = to_json();
  for (const char* k : {"work_dir", "raw_events", "zones", "outcomes", "host", "port"}) j.erase(k);
  return sha256_hex(j.dump());
}

fs::path RunConfig::samples_path(int n) const { return path("samples_nr" + std::to_string(n) + ".json"); }
fs::path RunConfig::checkpoint_path(int n) const { return path("checkpoint_nr" + std::to_string(n) + ".json"); }

// ---- shared steps --------------------------------------------------------

SplitSamples split_samples(const std::vector<Sample>& samples, std::uint64_t seed, double train_ratio,
                           double validation_ratio) {
  const auto matches = match_ids(samples);
  if (matches.size() < 2) throw DataError("need samples from at least 2 matches to split");
  auto [train_m, test_m] = split_train_test(matches, seed, train_ratio);
  SplitSamples s;
  if (validation_ratio > 0.0 && train_m.size() >= 2) {
    auto [fit_m, val_m] = split_train_test(train_m, seed + 1, 1.0 - validation_ratio);
    s.train = select_matches(samples, fit_m);
    s.validation = select_matches(samples, val_m);
  } else {
    s.train = select_matches(samples, train_m);
  }
  s.test = select_matches(samples, test_m);
  return s;
}

PredictorConfig model_config(const RunConfig& cfg, std::size_t sig_order, std::size_t hidden) {
  PredictorConfig m;
  m.logsig_dim = witt_dimension(kAugmentedDim, sig_order);
  m.emb_dim = cfg.emb_dim;
  m.hidden = hidden;
  m.hidden_layers = cfg.hidden_layers;
  return m;
}

TrainEvalResult train_and_evaluate(const SplitSamples& split, const PredictorConfig& model_cfg,
                                   const TrainConfig& train_cfg, const PitchPartition& zones, bool report_mse) {
  TrainEvalResult r;
  r.training = train(split.train, split.validation, model_cfg, train_cfg);
  if (!r.training.aborted) r.report = evaluate(r.training.params, split.test, zones, train_cfg.lambda, report_mse);
  return r;
}

std::string table_header(bool report_mse) {
  std::ostringstream s;
  s << std::left << std::setw(5) << "n_r" << std::setw(12) << "Test loss" << std::setw(12)
    << (report_mse ? "MSE" : "RMSE") << std::setw(12) << "CEL" << std::setw(12) << "Brier" << "KL";
  return s.str();
}

std::string table_row(int n_r, const EvalReport& r) {
  std::ostringstream s;
  s << std::left << std::fixed << std::setprecision(4) << std::setw(5) << n_r << std::setw(12) << r.test_loss
    << std::setw(12) << r.location_error << std::setw(12) << r.cel << std::setw(12) << r.brier << r.kl;
  return s.str();
}

std::string version_string() { return POSSIG_VERSION; }

void run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, bool oracle) {
  cfg.validate(command == "tune");
  if (command == "synth") return cmd_synth(cfg, out);
  if (command == "ingest") return cmd_ingest(cfg, out);
  if (command == "build") return cmd_build(cfg, out);
  if (command == "train") return cmd_train(cfg, out);
  if (command == "eval") return cmd_eval(cfg, out, oracle);
  if (command == "value") return cmd_value(cfg, out);
  if (command == "report") return cmd_report(cfg, out);
  if (command == "tune") return cmd_tune(cfg, out);
  throw ContractError("unknown command '" + command + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ContractError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitData;
}

}  // namespace possig
