#include "possig/xt.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"

namespace possig {

namespace {

void check_shapes(std::span<const double> shot_prob, std::span<const double> zone_xg,
                  std::span<const double> transition) {
  const std::size_t n = shot_prob.size();
  require(n > 0, "xT: empty grid");
  require(zone_xg.size() == n, "xT: zone_xg size mismatch");
  require(transition.size() == n * n, "xT: transition matrix must be n x n");
}

void sweep(std::span<const double> shot_prob, std::span<const double> zone_xg, std::span<const double> transition,
           const std::vector<double>& cur, std::vector<double>& next) {
  const std::size_t n = cur.size();
  for (std::size_t z = 0; z < n; ++z) {
    double move = 0.0;
    const double* row = transition.data() + z * n;
    for (std::size_t i = 0; i < n; ++i) move += row[i] * cur[i];
    next[z] = shot_prob[z] * zone_xg[z] + (1.0 - shot_prob[z]) * move;
  }
}

}  // namespace

std::vector<double> iterate_xt(std::span<const double> shot_prob, std::span<const double> zone_xg,
                               std::span<const double> transition, std::size_t iterations) {
  check_shapes(shot_prob, zone_xg, transition);
  std::vector<double> cur(shot_prob.size(), 0.0);
  std::vector<double> next(cur.size());
  for (std::size_t k = 0; k < iterations; ++k) {
    sweep(shot_prob, zone_xg, transition, cur, next);
    cur.swap(next);
  }
  return cur;
}

XtSolve solve_xt(std::span<const double> shot_prob, std::span<const double> zone_xg,
                 std::span<const double> transition, double tol, std::size_t max_iter) {
  check_shapes(shot_prob, zone_xg, transition);
  XtSolve out;
  out.values.assign(shot_prob.size(), 0.0);
  std::vector<double> next(out.values.size());
  for (out.iterations = 0; out.iterations < max_iter;) {
    sweep(shot_prob, zone_xg, transition, out.values, next);
    ++out.iterations;
    double change = 0.0;
    for (std::size_t z = 0; z < next.size(); ++z) change = std::max(change, std::abs(next[z] - out.values[z]));
    out.values.swap(next);
    out.last_change = change;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

XtModel fit_xt(std::span<const BallMove> moves, std::span<const Shot> shots, const XgModel& xg, Grid grid) {
  const std::size_t n = grid.cells();
  XtModel m;
  m.grid = grid;
  std::vector<double> shot_count(n, 0.0);
  std::vector<double> move_count(n, 0.0);
  std::vector<double> trans_count(n * n, 0.0);
  for (const auto& s : shots) shot_count[grid.cell_of(s.x, s.y)] += 1.0;
  for (const auto& mv : moves) {
    const std::size_t from = grid.cell_of(mv.x0, mv.y0);
    move_count[from] += 1.0;
    if (mv.successful) trans_count[from * n + grid.cell_of(mv.x1, mv.y1)] += 1.0;
  }

  m.shot_prob.assign(n, 0.0);
  m.zone_xg.assign(n, 0.0);
  m.transition.assign(n * n, 0.0);
  for (std::size_t z = 0; z < n; ++z) {
    const double total = shot_count[z] + move_count[z];
    if (total > 0.0) m.shot_prob[z] = shot_count[z] / total;
    m.zone_xg[z] = xg.prob(grid.center_x(z), grid.center_y(z));
    double row = 0.0;
    for (std::size_t i = 0; i < n; ++i) row += trans_count[z * n + i];
    if (row > 0.0)
      for (std::size_t i = 0; i < n; ++i) m.transition[z * n + i] = trans_count[z * n + i] / row;
  }

  auto solved = solve_xt(m.shot_prob, m.zone_xg, m.transition);
  m.xt = std::move(solved.values);
  m.iterations = solved.iterations;
  return m;
}

ActionSamples extract_actions(std::span<const Possession> possessions) {
  ActionSamples out;
  for (const auto& p : possessions) {
    const auto& ev = p.events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const auto a = ev[i].action;
      const bool has_next = i + 1 < ev.size();
      if (a == ActionType::Shot) {
        out.shots.push_back({ev[i].x, ev[i].y, has_next && ev[i + 1].action == ActionType::Goal});
      } else if (a == ActionType::Pass || a == ActionType::Dribble || a == ActionType::Cross) {
        BallMove mv{ev[i].x, ev[i].y, ev[i].x, ev[i].y, false};
        if (has_next) {
          mv.x1 = ev[i + 1].x;
          mv.y1 = ev[i + 1].y;
          mv.successful = is_style_action(ev[i + 1].action) || ev[i + 1].action == ActionType::Goal;
        }
        out.moves.push_back(mv);
      }
    }
  }
  return out;
}

nlohmann::json XtModel::to_json() const {
  return {{"format", "possig-xt"},
          {"rows", grid.rows},
          {"cols", grid.cols},
          {"cell_index", "row * cols + col; cols along pitch length"},
          {"iterations", iterations},
          {"shot_prob", shot_prob},
          {"zone_xg", zone_xg},
          {"transition", transition},
          {"xt", xt}};
}

XtModel XtModel::from_json(const nlohmann::json& j) {
  try {
    XtModel m;
    m.grid.rows = j.at("rows").get<std::size_t>();
    m.grid.cols = j.at("cols").get<std::size_t>();
    const std::size_t n = m.grid.cells();
    m.iterations = j.value("iterations", std::size_t{0});
    m.shot_prob = j.at("shot_prob").get<std::vector<double>>();
    m.zone_xg = j.at("zone_xg").get<std::vector<double>>();
    m.transition = j.at("transition").get<std::vector<double>>();
    m.xt = j.at("xt").get<std::vector<double>>();
    if (m.shot_prob.size() != n || m.zone_xg.size() != n || m.xt.size() != n || m.transition.size() != n * n)
      throw DataError("xT model: array sizes do not match the grid");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("xT model: ") + e.what());
  }
}

}  // namespace possig
