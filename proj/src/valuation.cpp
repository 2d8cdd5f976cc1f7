#include "possig/valuation.hpp"

#include <cmath>

#include "possig/dataset.hpp"
#include "possig/errors.hpp"

namespace possig {

namespace {

double p_of(const ActionProbs& p, ActionType a) { return p[action_index(a)]; }

double cross_or_shot(const ActionProbs& p) { return p_of(p, ActionType::Cross) + p_of(p, ActionType::Shot); }

}  // namespace

ActionProbs one_hot(ActionType a) {
  ActionProbs p{};
  p[action_index(a)] = 1.0;
  return p;
}

double poss_util(std::span<const ActionProbs> probs, bool had_attack) {
  double total = 0.0;
  for (const auto& p : probs) total += cross_or_shot(p);
  return had_attack ? total : 0.0 - total;
}

double poss_util_observed(std::span<const ActionType> actions) {
  std::vector<ActionProbs> probs;
  bool attack = false;
  for (auto a : actions) {
    probs.push_back(one_hot(a));
    attack = attack || a == ActionType::Cross || a == ActionType::Shot;
  }
  return poss_util(probs, attack);
}

double action_value(const ActionProbs& p) {
  return 5.0 * (p_of(p, ActionType::Dribble) + p_of(p, ActionType::Pass)) + 10.0 * cross_or_shot(p);
}

double zone_value(int area_level) { return 5.0 * static_cast<double>(area_level); }

double hpus_action_score(double av, double zv, double t) {
  require(t > 0.0, "HAS: interevent time must be positive");
  return std::sqrt(av * zv) / t;
}

double inverse_recency(std::size_t k) { return 1.0 / static_cast<double>(k); }

HpusResult hpus(std::span<const ActionProbs> probs, std::span<const std::pair<double, double>> locations,
                const PitchPartition& areas, const RecencyWeight& phi, std::span<const double> t) {
  require(probs.size() == locations.size() && probs.size() == t.size(), "hpus: sequences not aligned");
  HpusResult r;
  const std::size_t n = probs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double av = action_value(probs[i]);
    const double zv = zone_value(areas.zone_of(locations[i].first, locations[i].second));
    const double has = hpus_action_score(av, zv, t[i]);
    r.av.push_back(av);
    r.zv.push_back(zv);
    r.has.push_back(has);
    // i is zero-based here: weight index N + 1 - (i + 1)
    r.hpus += phi(n - i) * has;
  }
  return r;
}

double lav(const ActionProbs& p, double x, double y, const XgModel& xg, const XtModel& xt) {
  const double moves = p_of(p, ActionType::Dribble) + p_of(p, ActionType::Pass) + p_of(p, ActionType::Cross);
  return xg.prob(x, y) * p_of(p, ActionType::Shot) + xt.value_at(x, y) * moves;
}

double lav_observed(ActionType action, double x, double y, const XgModel& xg, const XtModel& xt) {
  return lav(one_hot(action), x, y, xg, xt);
}

ValuedPossession value_possession(const Possession& possession, std::size_t first_position,
                                  std::span<const Prediction> predictions, const ValuationModels& models,
                                  std::size_t possession_index) {
  const auto& ev = possession.events;
  require(!ev.empty(), "value_possession: empty possession");
  require(first_position + predictions.size() <= ev.size(), "value_possession: predictions beyond possession end");

  ValuedPossession vp;
  vp.match_id = possession.match_id();
  vp.team_id = possession.team_id();
  vp.possession = possession_index;

  std::vector<ActionProbs> pred_probs;
  std::vector<ActionProbs> obs_probs;
  std::vector<std::pair<double, double>> pred_loc;
  std::vector<std::pair<double, double>> obs_loc;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto& e = ev[first_position + k];
    const auto [px, py] = predictions[k].clamped_xy();
    ValuedAction va;
    va.position = first_position + k;
    va.action = e.action;
    va.probs = predictions[k].action_probs;
    va.pred_x = px;
    va.pred_y = py;
    va.obs_x = e.x;
    va.obs_y = e.y;
    va.lav_pred = lav(va.probs, px, py, models.xg, models.xt);
    va.lav_obs = lav_observed(e.action, e.x, e.y, models.xg, models.xt);
    vp.lpv_pred += va.lav_pred;
    vp.lpv_obs += va.lav_obs;
    pred_probs.push_back(va.probs);
    obs_probs.push_back(one_hot(e.action));
    pred_loc.emplace_back(px, py);
    obs_loc.emplace_back(e.x, e.y);
    vp.actions.push_back(va);
  }

  // Time is not modelled; both variants use t = 1.
  const std::vector<double> unit_t(predictions.size(), 1.0);
  const auto hp = hpus(pred_probs, pred_loc, models.areas, models.phi, unit_t);
  const auto ho = hpus(obs_probs, obs_loc, models.areas, models.phi, unit_t);
  vp.hpus_pred = hp.hpus;
  vp.hpus_obs = ho.hpus;
  for (std::size_t k = 0; k < vp.actions.size(); ++k) {
    auto& va = vp.actions[k];
    va.av_pred = hp.av[k];
    va.zv_pred = hp.zv[k];
    va.has_pred = hp.has[k];
    va.av_obs = ho.av[k];
    va.zv_obs = ho.zv[k];
    va.has_obs = ho.has[k];
  }

  bool attack = false;
  for (const auto& e : ev) attack = attack || e.action == ActionType::Cross || e.action == ActionType::Shot;
  vp.poss_util_pred = poss_util(pred_probs, attack);
  vp.poss_util_obs = poss_util(obs_probs, attack);

  if (vp.lpv_pred > kRelDiffEpsilon) vp.rel_diff = (vp.lpv_pred - vp.lpv_obs) / vp.lpv_pred;
  return vp;
}

std::vector<ValuedPossession> value_events(const std::vector<MatchEvent>& events, const Checkpoint& model,
                                           const ValuationModels& models) {
  std::vector<ValuedPossession> out;
  for (const auto& match : group_by_match(events)) {
    const auto possessions = segment_possessions(match);
    for (std::size_t p = 0; p < possessions.size(); ++p) {
      const auto samples = build_samples(possessions[p], model.n_r, model.sig_order, p);
      if (samples.empty()) continue;
      const auto preds = forward_batch(model.params, samples);
      out.push_back(value_possession(possessions[p], samples.front().position, preds, models, p));
    }
  }
  return out;
}

}  // namespace possig
