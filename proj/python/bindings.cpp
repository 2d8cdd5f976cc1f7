#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "possig/dataset.hpp"
#include "possig/errors.hpp"
#include "possig/events.hpp"
#include "possig/lyndon.hpp"
#include "possig/metrics.hpp"
#include "possig/pipeline.hpp"
#include "possig/predictor.hpp"
#include "possig/signature.hpp"
#include "possig/tensor.hpp"
#include "possig/valuation.hpp"
#include "possig/whatif.hpp"
#include "possig/xg.hpp"
#include "possig/xt.hpp"

namespace py = pybind11;
using namespace possig;

namespace {

std::vector<PointXYT> to_points(const std::vector<std::array<double, 3>>& pts) {
  std::vector<PointXYT> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p[0], p[1], p[2]});
  return out;
}

ActionType parse_action(const std::string& code) {
  auto a = action_from_code(code);
  if (!a) throw DataError("unknown action code '" + code + "'");
  return *a;
}

std::string code_of(ActionType a) { return std::string(1, action_code(a)); }

ActionProbs to_probs(const std::map<std::string, double>& m) {
  ActionProbs p{};
  for (const auto& [k, v] : m) p[action_index(parse_action(k))] = v;
  return p;
}

std::map<std::string, double> from_probs(const ActionProbs& p) {
  std::map<std::string, double> m;
  for (auto a : kAllActions) m[code_of(a)] = p[action_index(a)];
  return m;
}

py::dict prediction_dict(const Prediction& p) {
  py::dict d;
  d["action_probs"] = from_probs(p.action_probs);
  d["x"] = p.x;
  d["y"] = p.y;
  return d;
}

py::dict event_dict(const MatchEvent& e) {
  py::dict d;
  d["match_id"] = e.match_id;
  d["team_id"] = e.team_id;
  d["action"] = code_of(e.action);
  d["x"] = e.x;
  d["y"] = e.y;
  d["T"] = e.t;
  d["scrad"] = e.scrad;
  return d;
}

py::dict valued_dict(const ValuedPossession& v) {
  py::dict d;
  d["match_id"] = v.match_id;
  d["team_id"] = v.team_id;
  d["possession"] = v.possession;
  d["lpv_pred"] = v.lpv_pred;
  d["lpv_obs"] = v.lpv_obs;
  d["hpus_pred"] = v.hpus_pred;
  d["hpus_obs"] = v.hpus_obs;
  d["poss_util_pred"] = v.poss_util_pred;
  d["poss_util_obs"] = v.poss_util_obs;
  d["rel_diff"] = v.rel_diff ? py::cast(*v.rel_diff) : py::none();
  return d;
}

RunConfig config_from(const std::string& json_text) {
  return json_text.empty() ? RunConfig{} : RunConfig::from_json(nlohmann::json::parse(json_text));
}

}  // namespace

PYBIND11_MODULE(_possig, m) {
  m.doc() = "Possession signatures, next-action prediction and possession valuation";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.attr("__version__") = version_string();

  // ---- signatures
  m.def(
      "signature",
      [](const std::vector<std::vector<double>>& points, std::size_t order) {
        const auto s = path_signature(points, order);
        return std::vector<double>(s.coeffs().begin(), s.coeffs().end());
      },
      py::arg("points"), py::arg("order"), "Truncated signature of a piecewise-linear path, level by level.");
  m.def(
      "logsignature",
      [](const std::vector<std::vector<double>>& points, std::size_t order) {
        return project_lyndon(tensor_log(path_signature(points, order))).coeffs;
      },
      py::arg("points"), py::arg("order"), "Log-signature in the Lyndon basis.");
  m.def(
      "possession_logsig",
      [](const std::vector<std::array<double, 3>>& xyt, std::size_t order) {
        return logsig_of_possession(to_points(xyt), order).coeffs;
      },
      py::arg("xyt"), py::arg("order") = kDefaultSigOrder,
      "Log-signature of a possession given as (x, y, T) triples after augmentation.");
  m.def("lyndon_words", &lyndon_words, py::arg("dim"), py::arg("max_len"));
  m.def("witt_dimension", &witt_dimension, py::arg("dim"), py::arg("max_len"));
  m.def("tensor_size", &tensor_size, py::arg("dim"), py::arg("order"));

  // ---- events and datasets
  m.def(
      "ingest",
      [](const std::string& ndjson) {
        std::istringstream in(ndjson);
        const auto res = ingest_events(in);
        py::list events;
        for (const auto& e : res.events) events.append(event_dict(e));
        py::list rejected;
        for (const auto& r : res.rejected) rejected.append(py::make_tuple(r.line, r.reason));
        py::dict d;
        d["events"] = events;
        d["rejected"] = rejected;
        d["warnings"] = res.warnings;
        return d;
      },
      py::arg("ndjson"), "Parse raw NDJSON event records.");
  m.def(
      "possession_lengths",
      [](const std::string& ndjson) {
        std::istringstream in(ndjson);
        std::vector<std::size_t> lengths;
        for (const auto& match : group_by_match(ingest_events(in).events))
          for (const auto& p : segment_possessions(match)) lengths.push_back(p.size());
        return lengths;
      },
      py::arg("ndjson"), "Lengths of the possessions found in raw NDJSON events.");

  py::class_<Sample>(m, "Sample")
      .def(py::init<>())
      .def_readwrite("logsig", &Sample::logsig)
      .def_readwrite("scrad", &Sample::scrad)
      .def_readwrite("target_x", &Sample::target_x)
      .def_readwrite("target_y", &Sample::target_y)
      .def_readwrite("match_id", &Sample::match_id)
      .def_readwrite("team_id", &Sample::team_id)
      .def_readwrite("possession", &Sample::possession)
      .def_readwrite("position", &Sample::position)
      .def_property(
          "recent_actions",
          [](const Sample& s) {
            std::vector<std::string> out;
            for (auto a : s.recent_actions) out.push_back(code_of(a));
            return out;
          },
          [](Sample& s, const std::vector<std::string>& codes) {
            s.recent_actions.clear();
            for (const auto& c : codes) s.recent_actions.push_back(parse_action(c));
          })
      .def_property(
          "target_action", [](const Sample& s) { return code_of(s.target_action); },
          [](Sample& s, const std::string& c) { s.target_action = parse_action(c); });

  m.def(
      "build_dataset",
      [](const std::string& ndjson, int n_r, std::size_t order) {
        std::istringstream in(ndjson);
        return build_dataset(ingest_events(in).events, n_r, order);
      },
      py::arg("ndjson"), py::arg("n_r"), py::arg("order") = kDefaultSigOrder,
      "Samples for every possession prefix of length >= n_r.");
  m.def("load_dataset", [](const std::string& path) { return load_dataset(path).samples; }, py::arg("path"));

  // ---- predictor
  py::class_<PredictorConfig>(m, "PredictorConfig")
      .def(py::init<>())
      .def_readwrite("logsig_dim", &PredictorConfig::logsig_dim)
      .def_readwrite("emb_dim", &PredictorConfig::emb_dim)
      .def_readwrite("hidden", &PredictorConfig::hidden)
      .def_readwrite("hidden_layers", &PredictorConfig::hidden_layers)
      .def_property_readonly("input_dim", &PredictorConfig::input_dim);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<PredictorParams>(m, "PredictorParams")
      .def_static("init", &PredictorParams::init, py::arg("config"), py::arg("seed"))
      .def_static("zeros", &PredictorParams::zeros, py::arg("config"))
      .def_readonly("config", &PredictorParams::config)
      .def_property_readonly("parameter_count", &PredictorParams::parameter_count);

  m.def("recency_weights", &recency_weights, py::arg("n"));
  m.def(
      "predict",
      [](const PredictorParams& p, const std::vector<Sample>& samples) {
        py::list out;
        for (const auto& pr : forward_batch(p, samples)) out.append(prediction_dict(pr));
        return out;
      },
      py::arg("params"), py::arg("samples"));
  m.def(
      "loss",
      [](const PredictorParams& p, const std::vector<Sample>& batch, double lambda) {
        const auto lb = loss(p, batch, lambda);
        return py::dict(py::arg("total") = lb.total, py::arg("rmse") = lb.rmse, py::arg("cel") = lb.cel);
      },
      py::arg("params"), py::arg("batch"), py::arg("lambda_") = 1.0);
  m.def(
      "train",
      [](const std::vector<Sample>& train_set, const std::vector<Sample>& validation, const PredictorConfig& model,
         const TrainConfig& cfg) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(train_set, validation, model, cfg);
        }
        std::vector<double> curve;
        for (const auto& e : r.log) curve.push_back(e.train.total);
        return py::make_tuple(r.params, curve, r.best_epoch, r.aborted);
      },
      py::arg("train_set"), py::arg("validation_set"), py::arg("model"), py::arg("config"),
      "Adam training; returns (params, train_loss_per_epoch, best_epoch, aborted).");

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readonly("params", &Checkpoint::params)
      .def_readonly("n_r", &Checkpoint::n_r)
      .def_readonly("sig_order", &Checkpoint::sig_order)
      .def_readonly("lambda_", &Checkpoint::lambda);
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  // ---- metrics
  m.def(
      "brier",
      [](const std::vector<std::map<std::string, double>>& probs, const std::vector<std::string>& truth) {
        require(probs.size() == truth.size(), "brier: length mismatch");
        std::vector<Prediction> preds;
        std::vector<Sample> samples;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          Prediction p;
          p.action_probs = to_probs(probs[i]);
          preds.push_back(p);
          Sample s;
          s.target_action = parse_action(truth[i]);
          samples.push_back(s);
        }
        return brier(preds, samples);
      },
      py::arg("probs"), py::arg("truth"));
  m.def(
      "kl_divergence", [](const std::vector<double>& p, const std::vector<double>& q) { return kl_divergence(p, q); },
      py::arg("p"), py::arg("q"));

  // ---- xG / xT / values
  py::class_<XgModel>(m, "XgModel")
      .def(py::init([](std::array<double, 3> g) { return XgModel{g}; }), py::arg("gamma"))
      .def_readwrite("gamma", &XgModel::gamma)
      .def("prob", &XgModel::prob, py::arg("x"), py::arg("y"));
  m.def(
      "shot_geometry",
      [](double x, double y) {
        const auto g = shot_geometry(x, y);
        return py::make_tuple(g.distance, g.angle);
      },
      py::arg("x"), py::arg("y"), "(distance in metres, goal-mouth angle in radians)");
  m.def(
      "fit_xg",
      [](const std::vector<std::tuple<double, double, bool>>& shots) {
        std::vector<Shot> s;
        for (const auto& [x, y, g] : shots) s.push_back({x, y, g});
        const auto fit = fit_xg(s);
        return py::make_tuple(fit.model, fit.std_errors, fit.ridge);
      },
      py::arg("shots"), "Fit on (x, y, goal) triples; returns (model, std_errors, ridge_used).");
  m.def(
      "iterate_xt",
      [](const std::vector<double>& s, const std::vector<double>& g, const std::vector<double>& t, std::size_t k) {
        return iterate_xt(s, g, t, k);
      },
      py::arg("shot_prob"), py::arg("zone_xg"), py::arg("transition"), py::arg("iterations"));
  m.def(
      "solve_xt",
      [](const std::vector<double>& s, const std::vector<double>& g, const std::vector<double>& t) {
        const auto r = solve_xt(s, g, t);
        return py::make_tuple(r.values, r.iterations, r.converged);
      },
      py::arg("shot_prob"), py::arg("zone_xg"), py::arg("transition"));

  m.def(
      "poss_util",
      [](const std::vector<std::map<std::string, double>>& probs, bool had_attack) {
        std::vector<ActionProbs> p;
        for (const auto& x : probs) p.push_back(to_probs(x));
        return poss_util(p, had_attack);
      },
      py::arg("probs"), py::arg("had_attack"));
  m.def(
      "action_value", [](const std::map<std::string, double>& probs) { return action_value(to_probs(probs)); },
      py::arg("probs"));
  m.def("hpus_action_score", &hpus_action_score, py::arg("action_value"), py::arg("zone_value"), py::arg("t") = 1.0);
  m.def(
      "lav",
      [](const std::map<std::string, double>& probs, double x, double y, const XgModel& xg, double xt_value) {
        // flat threat surface
        XtModel xt;
        xt.xt.assign(xt.grid.cells(), xt_value);
        return lav(to_probs(probs), x, y, xg, xt);
      },
      py::arg("probs"), py::arg("x"), py::arg("y"), py::arg("xg"), py::arg("xt_value"),
      "Location-based action value against a constant threat value.");
  m.def(
      "value_events",
      [](const std::string& ndjson, const std::string& checkpoint, const std::string& xg_path,
         const std::string& xt_path) {
        std::istringstream in(ndjson);
        const auto events = ingest_events(in).events;
        const auto served = load_served_model(checkpoint, xg_path, xt_path);
        py::list out;
        for (const auto& v : value_events(events, served.checkpoint, served.valuation)) out.append(valued_dict(v));
        return out;
      },
      py::arg("ndjson"), py::arg("checkpoint"), py::arg("xg"), py::arg("xt"));

  // ---- what-if service
  py::class_<WhatIfService>(m, "_WhatIfService")
      .def(py::init<>())
      .def(
          "load",
          [](WhatIfService& s, const std::string& ck, const std::string& xg, const std::string& xt) {
            s.load(load_served_model(ck, xg, xt));
          },
          py::arg("checkpoint"), py::arg("xg"), py::arg("xt"))
      .def_property_readonly("loaded", &WhatIfService::loaded)
      .def("predict_json",
           [](const WhatIfService& s, const std::string& body) {
             const auto r = s.predict(body);
             return py::make_tuple(r.status, r.body.dump());
           })
      .def("model_info_json", [](const WhatIfService& s) {
        const auto r = s.model_info();
        return py::make_tuple(r.status, r.body.dump());
      });

  // ---- pipeline
  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_json, bool oracle) {
        const auto cfg = config_from(config_json);
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          run_command(command, cfg, out, oracle);
        }
        return out.str();
      },
      py::arg("command"), py::arg("config_json") = "", py::arg("oracle") = false,
      "Run a pipeline stage with a JSON config; returns its console output.");
}
