#include "possig/whatif.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "possig/dataset.hpp"
#include "possig/errors.hpp"

namespace possig {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& reason) { return {status, json{{"error", reason}}}; }

// Request validation failure carrying its HTTP status.
struct RequestError {
  int status;
  std::string reason;
};

double number_field(const json& obj, const char* key, std::size_t i) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw RequestError{400, "possession[" + std::to_string(i) + "]." + key + " must be a number"};
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw RequestError{400, "possession[" + std::to_string(i) + "]." + key + " is not finite"};
  return v;
}

Possession parse_possession(const json& req, int& n_r) {
  if (!req.is_object()) throw RequestError{400, "request body must be a JSON object"};
  auto nr = req.find("n_r");
  if (nr == req.end() || !nr->is_number_integer()) throw RequestError{400, "n_r must be an integer"};
  n_r = nr->get<int>();
  int scrad = 0;
  if (auto s = req.find("scrad"); s != req.end()) {
    if (!s->is_number_integer()) throw RequestError{400, "scrad must be an integer"};
    scrad = s->get<int>();
  }
  auto poss = req.find("possession");
  if (poss == req.end() || !poss->is_array()) throw RequestError{400, "possession must be an array"};

  Possession p;
  p.terminal = PossessionEnd::EndOfData;
  for (std::size_t i = 0; i < poss->size(); ++i) {
    const auto& e = (*poss)[i];
    if (!e.is_object()) throw RequestError{400, "possession[" + std::to_string(i) + "] must be an object"};
    auto a = e.find("action");
    if (a == e.end() || !a->is_string()) throw RequestError{400, "possession[" + std::to_string(i) + "].action missing"};
    auto action = action_from_code(a->get<std::string>());
    if (!action) throw RequestError{400, "possession[" + std::to_string(i) + "]: unknown action code"};
    if (*action == ActionType::MatchEnd) throw RequestError{400, "match end cannot be part of a possession"};
    MatchEvent ev;
    ev.match_id = "whatif";
    ev.team_id = "whatif";
    ev.action = *action;
    ev.x = number_field(e, "x", i);
    ev.y = number_field(e, "y", i);
    ev.t = number_field(e, "T", i);
    ev.scrad = scrad;
    p.events.push_back(std::move(ev));
  }
  for (std::size_t i = 0; i < p.events.size(); ++i) {
    const auto& ev = p.events[i];
    for (double v : {ev.x, ev.y, ev.t})
      if (v < 0.0 || v > 1.0) throw RequestError{422, "possession[" + std::to_string(i) + "]: value outside [0, 1]"};
  }
  return p;
}

constexpr std::array<ActionType, 4> kHypothetical = {ActionType::Pass, ActionType::Dribble, ActionType::Cross,
                                                     ActionType::Shot};

}  // namespace

WhatIfService::WhatIfService(ServedModel model) { load(std::move(model)); }

void WhatIfService::load(ServedModel model) {
  auto p = std::make_shared<const ServedModel>(std::move(model));
  std::lock_guard lock(mu_);
  model_ = std::move(p);
}

bool WhatIfService::loaded() const { return snapshot() != nullptr; }

std::shared_ptr<const ServedModel> WhatIfService::snapshot() const {
  std::lock_guard lock(mu_);
  return model_;
}

HttpReply WhatIfService::predict(const std::string& body) const {
  json req = json::parse(body, nullptr, false);
  if (req.is_discarded()) return error_reply(400, "malformed JSON");
  return predict(req);
}

HttpReply WhatIfService::predict(const json& request) const {
  const auto model = snapshot();
  if (!model) return error_reply(409, "no model loaded");
  const auto& ckpt = model->checkpoint;

  Possession poss;
  int n_r = 0;
  try {
    poss = parse_possession(request, n_r);
  } catch (const RequestError& e) {
    return error_reply(e.status, e.reason);
  }
  if (n_r != ckpt.n_r) return error_reply(400, "n_r does not match the loaded model (" + std::to_string(ckpt.n_r) + ")");
  const std::size_t len = poss.events.size();
  if (len < static_cast<std::size_t>(n_r)) return error_reply(400, "insufficient actions");

  // A placeholder target lets the dataset builder emit the sample for the
  // full prefix; earlier samples value the actions already taken.
  Possession extended = poss;
  extended.events.push_back(poss.events.back());
  extended.events.back().action = ActionType::Pass;
  const auto samples = build_samples(extended, ckpt.n_r, ckpt.sig_order);
  if (samples.empty() || samples.back().position != len) return error_reply(400, "insufficient actions");

  std::vector<Prediction> preds;
  try {
    preds = forward_batch(ckpt.params, samples);
  } catch (const NumericError& e) {
    return error_reply(500, e.what());
  }
  const Prediction next = preds.back();
  preds.pop_back();

  double lpv_obs = 0.0;
  double lpv_pred = 0.0;
  if (!preds.empty()) {
    const auto vp = value_possession(poss, samples.front().position, preds, model->valuation);
    lpv_obs = vp.lpv_obs;
    lpv_pred = vp.lpv_pred;
  }

  const auto [px, py] = next.clamped_xy();
  json probs = json::object();
  for (auto a : kAllActions) probs[std::string(1, action_code(a))] = next.prob(a);
  json hyp = json::object();
  for (auto a : kHypothetical)
    hyp[std::string(1, action_code(a))] = lav(one_hot(a), px, py, model->valuation.xg, model->valuation.xt);

  json out = {{"action_probs", probs},
              {"predicted_xy", {{"x", px}, {"y", py}}},
              {"predicted_zone", model->zones.zone_of(px, py)},
              {"hypothetical_lav", hyp},
              {"lav_predicted", lav(next.action_probs, px, py, model->valuation.xg, model->valuation.xt)},
              {"lpv_so_far", lpv_obs},
              {"lpv_predicted", lpv_pred},
              {"n_r", ckpt.n_r}};
  return {200, out};
}

HttpReply WhatIfService::model_info() const {
  const auto model = snapshot();
  if (!model) return error_reply(409, "no model loaded");
  const auto& c = model->checkpoint;
  json out = {{"checkpoint_sha256", model->checkpoint_sha256},
              {"n_r", c.n_r},
              {"lambda", c.lambda},
              {"sig_order", c.sig_order},
              {"hidden", c.params.config.hidden},
              {"partition", model->zones.name()},
              {"zones", model->zones.to_json()},
              {"areas", model->valuation.areas.to_json()}};
  return {200, out};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

ServedModel load_served_model(const std::string& checkpoint_path, const std::string& xg_path,
                              const std::string& xt_path, const std::string& zones_path) {
  auto read_json = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": invalid JSON");
    return j;
  };
  ServedModel m;
  m.checkpoint = load_checkpoint(checkpoint_path);
  m.checkpoint_sha256 = sha256_file(checkpoint_path);
  m.valuation.xg = XgModel::from_json(read_json(xg_path));
  m.valuation.xt = XtModel::from_json(read_json(xt_path));
  if (!zones_path.empty()) m.zones = PitchPartition::load(zones_path);
  return m;
}

}  // namespace possig
