#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "possig/events.hpp"
#include "possig/pitch.hpp"
#include "possig/predictor.hpp"
#include "possig/xg.hpp"
#include "possig/xt.hpp"

namespace possig {

using ActionProbs = std::array<double, kNumActions>;

/// One-hot probability vector.
ActionProbs one_hot(ActionType a);

/// Signed cumulative cross/shot probability. `had_attack` selects c = +1.
double poss_util(std::span<const ActionProbs> probs, bool had_attack);
/// Observed variant: number of crosses and shots (never positive without one).
double poss_util_observed(std::span<const ActionType> actions);

/// 0/5/10 ladder: 5 P(dribble, pass) + 10 P(cross, shot).
double action_value(const ActionProbs& probs);
/// 0/5/10 ladder for area levels 0/1/2.
double zone_value(int area_level);
double hpus_action_score(double action_value, double zone_value, double t);

/// Recency weight phi(k), k = 1 for the final action.
using RecencyWeight = std::function<double(std::size_t)>;
double inverse_recency(std::size_t k);

struct HpusResult {
  double hpus = 0.0;
  std::vector<double> av;
  std::vector<double> zv;
  std::vector<double> has;
};

/// HPUS = sum_i phi(N+1-i) HAS_i with the zone value taken from the area
/// of each location.
HpusResult hpus(std::span<const ActionProbs> probs, std::span<const std::pair<double, double>> locations,
                const PitchPartition& areas, const RecencyWeight& phi, std::span<const double> t);

/// Location-based action value: xG * P(shot) + xT * P(dribble, pass, cross).
double lav(const ActionProbs& probs, double x, double y, const XgModel& xg, const XtModel& xt);
/// Observed variant: xG for a shot, xT for a pass/dribble/cross, else 0.
double lav_observed(ActionType action, double x, double y, const XgModel& xg, const XtModel& xt);

struct ValuationModels {
  XgModel xg;
  XtModel xt;
  PitchPartition areas = default_areas();
  RecencyWeight phi = inverse_recency;
};

struct ValuedAction {
  std::size_t position = 0;  // index of the action within the possession
  ActionType action = ActionType::Pass;
  ActionProbs probs{};
  double pred_x = 0.0;
  double pred_y = 0.0;
  double obs_x = 0.0;
  double obs_y = 0.0;
  double lav_pred = 0.0;
  double lav_obs = 0.0;
  double av_pred = 0.0;
  double av_obs = 0.0;
  double zv_pred = 0.0;
  double zv_obs = 0.0;
  double has_pred = 0.0;
  double has_obs = 0.0;
};

inline constexpr double kRelDiffEpsilon = 1e-9;

struct ValuedPossession {
  std::string match_id;
  std::string team_id;
  std::size_t possession = 0;
  std::vector<ValuedAction> actions;
  double lpv_pred = 0.0;
  double lpv_obs = 0.0;
  double hpus_pred = 0.0;
  double hpus_obs = 0.0;
  double poss_util_pred = 0.0;
  double poss_util_obs = 0.0;
  std::optional<double> rel_diff;  // (pred - obs) / pred, absent when pred <= eps
};

/// Values the actions at positions first_position.. of a possession, one
/// prediction per position.
ValuedPossession value_possession(const Possession& possession, std::size_t first_position,
                                  std::span<const Prediction> predictions, const ValuationModels& models,
                                  std::size_t possession_index = 0);

/// Runs the predictor over every possession of every match and values the
/// possessions that yield at least one sample.
std::vector<ValuedPossession> value_events(const std::vector<MatchEvent>& events, const Checkpoint& model,
                                           const ValuationModels& models);

}  // namespace possig
