#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "possig/dataset.hpp"
#include "possig/errors.hpp"
#include "possig/pipeline.hpp"
#include "possig/random.hpp"
#include "possig/whatif.hpp"

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>

using namespace possig;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

XtModel ramp_xt() {
  XtModel m;
  const std::size_t n = m.grid.cells();
  m.shot_prob.assign(n, 0.0);
  m.zone_xg.assign(n, 0.0);
  m.transition.assign(n * n, 0.0);
  for (std::size_t c = 0; c < n; ++c) m.xt.push_back(0.01 + 0.1 * m.grid.center_x(c));
  return m;
}

ServedModel test_model(int n_r = 3) {
  PredictorConfig pc;
  pc.hidden = 32;
  ServedModel m;
  m.checkpoint = Checkpoint{PredictorParams::init(pc, 11), n_r, 3, 1.0, 11};
  m.valuation.xg = XgModel{{-1.0, -0.1, 2.0}};
  m.valuation.xt = ramp_xt();
  m.checkpoint_sha256 = sha256_hex(checkpoint_to_json(m.checkpoint).dump());
  return m;
}

json request(std::size_t len, int n_r = 3, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  json poss = json::array();
  double t = 0.1;
  for (std::size_t i = 0; i < len; ++i) {
    t += 0.001;
    poss.push_back({{"action", std::string(1, "pdxp"[i % 4])},
                    {"x", uniform(rng, 0.2, 0.9)},
                    {"y", uniform(rng, 0.1, 0.9)},
                    {"T", t}});
  }
  return {{"n_r", n_r}, {"possession", poss}, {"scrad", 0}};
}

Possession possession_of(const json& req) {
  Possession p;
  for (const auto& e : req["possession"]) {
    MatchEvent ev;
    ev.match_id = ev.team_id = "whatif";
    ev.action = *action_from_code(e["action"].get<std::string>());
    ev.x = e["x"];
    ev.y = e["y"];
    ev.t = e["T"];
    p.events.push_back(ev);
  }
  return p;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("possig_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(const fs::path& dir) {
  RunConfig c;
  c.work_dir = dir;
  c.n_r = {3};
  c.hidden = 64;
  c.batch_size = 32;
  c.epochs = 1;
  c.tune.hidden = {64};
  c.tune.batch_size = {32};
  return c;
}

}  // namespace

TEST_SUITE("whatif") {
  TEST_CASE("a fresh service answers 409") {
    WhatIfService s;
    CHECK_FALSE(s.loaded());
    CHECK(s.predict(request(4)).status == 409);
    CHECK(s.model_info().status == 409);
    s.load(test_model());
    CHECK(s.loaded());
    CHECK(s.model_info().status == 200);
  }

  TEST_CASE("request validation") {
    WhatIfService s(test_model());
    auto short_req = s.predict(request(2));
    CHECK(short_req.status == 400);
    CHECK(short_req.body["error"] == "insufficient actions");
    CHECK(s.predict(std::string("{not json")).status == 400);
    CHECK(s.predict(json{{"possession", json::array()}}).status == 400);
    CHECK(s.predict(request(5, 4)).status == 400);

    auto out_of_range = request(4);
    out_of_range["possession"][1]["x"] = 1.2;
    CHECK(s.predict(out_of_range).status == 422);
    auto bad_code = request(4);
    bad_code["possession"][0]["action"] = "q";
    CHECK(s.predict(bad_code).status == 400);
    auto match_end = request(4);
    match_end["possession"][2]["action"] = "@";
    CHECK(s.predict(match_end).status == 400);
    auto no_y = request(4);
    no_y["possession"][0].erase("y");
    CHECK(s.predict(no_y).status == 400);
  }

  TEST_CASE("response fields") {
    const auto model = test_model();
    WhatIfService s(model);
    auto r = s.predict(request(3));
    REQUIRE(r.status == 200);
    double sum = 0.0;
    for (const auto& [k, v] : r.body["action_probs"].items()) sum += v.get<double>();
    CHECK(r.body["action_probs"].size() == 7);
    CHECK(std::abs(sum - 1.0) < 1e-12);
    const double px = r.body["predicted_xy"]["x"], py = r.body["predicted_xy"]["y"];
    CHECK(px >= 0.0);
    CHECK(px <= 1.0);
    CHECK(r.body["predicted_zone"] == default_zones().zone_of(px, py));
    CHECK(r.body["hypothetical_lav"]["s"].get<double>() == model.valuation.xg.prob(px, py));
    CHECK(r.body["hypothetical_lav"]["p"].get<double>() == model.valuation.xt.value_at(px, py));
    CHECK(r.body["lpv_so_far"] == 0.0);  // nothing valued before the first full window
    CHECK(r.body["n_r"] == 3);

    // repeated calls are identical
    CHECK(s.predict(request(6)).body.dump() == s.predict(request(6)).body.dump());
    CHECK(s.model_info().body.dump() == s.model_info().body.dump());
    CHECK(s.model_info().body["checkpoint_sha256"] == model.checkpoint_sha256);
  }

  TEST_CASE("agrees with the batch valuation path") {
    const auto model = test_model(4);
    WhatIfService s(model);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto req = request(5 + seed, 4, seed);
      auto r = s.predict(req);
      REQUIRE(r.status == 200);
      const auto poss = possession_of(req);
      const auto samples = build_samples(poss, 4, 3);
      const auto preds = forward_batch(model.checkpoint.params, samples);
      const auto v = value_possession(poss, samples.front().position, preds, model.valuation);
      CHECK(r.body["lpv_so_far"].get<double>() == v.lpv_obs);
      CHECK(r.body["lpv_predicted"].get<double>() == v.lpv_pred);

      // the next-action prediction is the one for the full prefix
      auto ext = poss;
      ext.events.push_back(poss.events.back());
      const auto last = forward(model.checkpoint.params, build_samples(ext, 4, 3).back());
      CHECK(r.body["action_probs"]["x"].get<double>() == last.prob(ActionType::Cross));
    }
  }

  TEST_CASE("HTTP round trip") {
    WhatIfService s(test_model());
    ServerOptions opt;
    opt.port = 0;
    HttpServer server(s, opt);
    const int port = server.bind();
    REQUIRE(port > 0);
    std::thread th([&] { server.listen(); });

    httplib::Client cli("127.0.0.1", port);
    cli.set_connection_timeout(5, 0);
    auto info = cli.Get("/v1/model/info");
    REQUIRE(info);
    CHECK(info->status == 200);
    CHECK(info->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(json::parse(info->body)["n_r"] == 3);

    auto pred = cli.Post("/v1/predict", request(4).dump(), "application/json");
    REQUIRE(pred);
    CHECK(pred->status == 200);
    CHECK(json::parse(pred->body) == s.predict(request(4)).body);

    auto bad = cli.Post("/v1/predict", "[]", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    auto pre = cli.Options("/v1/predict");
    REQUIRE(pre);
    CHECK(pre->status == 204);

    server.stop();
    th.join();
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("config parsing and validation") {
    CHECK_THROWS_AS(RunConfig::from_json(json{{"epochz", 3}}), ContractError);
    CHECK_THROWS_AS(RunConfig::from_json(json{{"tune", {{"width", {64}}}}}), ContractError);
    auto c = RunConfig::from_json(json{{"n_r", {3, 5}}, {"epochs", 2}});
    CHECK(c.n_r == std::vector<int>{3, 5});
    CHECK(c.epochs == 2);
    CHECK(RunConfig::from_json(c.to_json()).hash() == c.hash());
    auto moved = c;
    moved.work_dir = "/elsewhere";
    CHECK(moved.hash() == c.hash());
    moved.seed = 43;
    CHECK(moved.hash() != c.hash());

    RunConfig bad;
    bad.n_r = {2};
    CHECK_THROWS_AS(bad.validate(), ContractError);
    RunConfig grid;
    grid.tune.hidden = {100};
    CHECK_NOTHROW(grid.validate());
    CHECK_THROWS_AS(grid.validate(true), ContractError);
    grid.tune.hidden = {64, 128};
    grid.tune.sig_order = {5};
    CHECK_THROWS_AS(grid.validate(true), ContractError);
  }

  TEST_CASE("build counts prefixes of a 5-event possession") {
    TempDir dir("build");
    {
      std::ofstream raw(dir.path / "raw.ndjson");
      for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 5; ++i)
          raw << json{{"match_id", "F" + std::to_string(m)}, {"team_id", "A"}, {"action", i == 4 ? "s" : "p"},
                      {"x_raw", 50.0 + 10 * i}, {"y_raw", 34.0}, {"t_raw_sec", 10.0 * i}}
                     .dump()
              << '\n';
    }
    auto cfg = small_config(dir.path);
    cfg.raw_events = dir.path / "raw.ndjson";
    std::ostringstream log;
    run_command("ingest", cfg, log);
    run_command("build", cfg, log);
    auto ds = load_dataset(cfg.samples_path(3).string());
    CHECK(ds.samples.size() == 4);  // two per match
    CHECK(ds.samples[0].position == 3);
    CHECK(ds.samples[1].position == 4);
    auto manifest = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest["config_hash"] == cfg.hash());
    CHECK(manifest["commands"].contains("build"));
  }

  TEST_CASE("oracle eval, single-point tune and reproducibility") {
    TempDir dir("pipe");
    auto cfg = small_config(dir.path);
    std::ostringstream log;
    for (const char* c : {"synth", "ingest", "build"}) run_command(c, cfg, log);
    run_command("eval", cfg, log, true);
    const auto oracle_table = slurp(dir.path / "eval_table.csv");
    CHECK(oracle_table.find("\n3,0,0,0,0,0,") != std::string::npos);

    run_command("train", cfg, log);
    run_command("eval", cfg, log);
    const auto eval_table = slurp(dir.path / "eval_table.csv");
    const auto eval_row = eval_table.substr(eval_table.find('\n') + 1);

    run_command("tune", cfg, log);
    const auto tune = slurp(dir.path / "tune_results.csv");
    const auto tune_row = tune.substr(tune.find('\n') + 1);
    CHECK(tune_row == "1,64,32,3," + eval_row);

    // same config, same bytes
    const auto ck = slurp(cfg.checkpoint_path(3));
    run_command("train", cfg, log);
    CHECK(slurp(cfg.checkpoint_path(3)) == ck);

    run_command("value", cfg, log);
    run_command("report", cfg, log);
    for (const char* f : {"xg.json", "xt.json", "valued_possessions.csv", "team_match.csv", "correlations.csv"})
      CHECK(fs::exists(dir.path / f));
  }

  TEST_CASE("missing input fails with a data error and leaves no partial outputs") {
    TempDir dir("missing");
    auto cfg = small_config(dir.path);
    cfg.raw_events = dir.path / "nope.ndjson";
    std::ostringstream log;
    try {
      run_command("ingest", cfg, log);
      FAIL("expected an exception");
    } catch (const std::exception& e) {
      CHECK(exit_code_for(e) == kExitData);
    }
    try {
      run_command("train", cfg, log);
      FAIL("expected an exception");
    } catch (const std::exception& e) {
      CHECK(exit_code_for(e) == kExitData);
    }
    for (const auto& f : fs::directory_iterator(dir.path)) CHECK(f.path().extension() != ".partial");
    CHECK_FALSE(fs::exists(dir.path / "events.ndjson"));
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(ContractError("x")) == kExitUsage);
    CHECK(exit_code_for(DataError("x")) == kExitData);
    CHECK(exit_code_for(NumericError("x")) == kExitNumeric);
    RunConfig c;
    std::ostringstream log;
    try {
      run_command("fly", c, log);
      FAIL("expected an exception");
    } catch (const std::exception& e) {
      CHECK(exit_code_for(e) == kExitUsage);
    }
  }
}
