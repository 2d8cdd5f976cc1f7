#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "possig/events.hpp"
#include "possig/pitch.hpp"
#include "possig/xg.hpp"

namespace possig {

/// Ball progression by pass, dribble or cross.
struct BallMove {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  bool successful = false;
};

struct XtSolve {
  std::vector<double> values;
  std::size_t iterations = 0;
  double last_change = 0.0;
  bool converged = false;
};

inline constexpr double kXtTolerance = 1e-6;
inline constexpr std::size_t kXtMaxIterations = 50;

/// Iterates xT(z) = s(z) xg(z) + (1 - s(z)) sum_i T(z,i) xT(i) from zero
/// until the sup-norm change drops below `tol` or `max_iter` is reached.
/// `transition` is row-major n x n.
XtSolve solve_xt(std::span<const double> shot_prob, std::span<const double> zone_xg,
                 std::span<const double> transition, double tol = kXtTolerance,
                 std::size_t max_iter = kXtMaxIterations);

/// Exactly `iterations` sweeps from zero, no early stop.
std::vector<double> iterate_xt(std::span<const double> shot_prob, std::span<const double> zone_xg,
                               std::span<const double> transition, std::size_t iterations);

struct XtModel {
  Grid grid;
  std::vector<double> shot_prob;
  std::vector<double> zone_xg;
  std::vector<double> transition;  // cells x cells, row-major
  std::vector<double> xt;
  std::size_t iterations = 0;

  double value_at(double x, double y) const { return xt[grid.cell_of(x, y)]; }

  nlohmann::json to_json() const;
  static XtModel from_json(const nlohmann::json& j);
};

/// Estimates shot probabilities and the successful-move transition matrix
/// per grid cell, evaluates xG at cell centres and solves for xT.
XtModel fit_xt(std::span<const BallMove> moves, std::span<const Shot> shots, const XgModel& xg, Grid grid = {});

struct ActionSamples {
  std::vector<BallMove> moves;
  std::vector<Shot> shots;
};

/// Moves and shots of a set of possessions. A move ends at the next event's
/// location; it is successful when that event is a style action or a goal.
/// A shot scores when the possession's next event is a goal.
ActionSamples extract_actions(std::span<const Possession> possessions);

}  // namespace possig
