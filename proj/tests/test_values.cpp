#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"
#include "possig/random.hpp"
#include "possig/report.hpp"
#include "possig/valuation.hpp"
#include "possig/xg.hpp"
#include "possig/xt.hpp"

using namespace possig;

namespace {

XtModel flat_xt(double value) {
  XtModel m;
  m.xt.assign(m.grid.cells(), value);
  m.shot_prob.assign(m.grid.cells(), 0.0);
  m.zone_xg.assign(m.grid.cells(), 0.0);
  m.transition.assign(m.grid.cells() * m.grid.cells(), 0.0);
  return m;
}

XgModel flat_xg(double p) { return XgModel{{std::log(p / (1 - p)), 0.0, 0.0}}; }

ActionProbs probs_of(std::initializer_list<std::pair<ActionType, double>> list) {
  ActionProbs p{};
  for (auto [a, v] : list) p[action_index(a)] = v;
  return p;
}

std::vector<Shot> simulate_shots(const XgModel& truth, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Shot> shots;
  for (std::size_t i = 0; i < n; ++i) {
    Shot s;
    s.x = uniform(rng, 0.6, 1.0);
    s.y = uniform(rng, 0.1, 0.9);
    s.goal = unit_uniform(rng) < truth.prob(s.x, s.y);
    shots.push_back(s);
  }
  return shots;
}

MatchEvent ev(const std::string& m, const std::string& team, ActionType a, double x = 0.5, double y = 0.5) {
  MatchEvent e;
  e.match_id = m;
  e.team_id = team;
  e.action = a;
  e.x = x;
  e.y = y;
  return e;
}

ValuedPossession vp(const std::string& m, const std::string& team, double lpv_pred, double lpv_obs) {
  ValuedPossession v;
  v.match_id = m;
  v.team_id = team;
  v.lpv_pred = lpv_pred;
  v.lpv_obs = lpv_obs;
  v.hpus_pred = 2 * lpv_pred;
  v.hpus_obs = 3 * lpv_obs;
  v.poss_util_pred = lpv_pred - 0.1;
  v.poss_util_obs = lpv_obs;
  if (lpv_pred > kRelDiffEpsilon) v.rel_diff = (lpv_pred - lpv_obs) / lpv_pred;
  return v;
}

}  // namespace

TEST_SUITE("xg") {
  TEST_CASE("zero coefficients give one half everywhere") {
    XgModel m;
    for (double x : {0.0, 0.3, 0.9, 1.0})
      for (double y : {0.0, 0.5, 1.0}) CHECK(m.prob(x, y) == 0.5);
  }

  TEST_CASE("geometry") {
    CHECK(shot_geometry(1.0, 0.5).angle == doctest::Approx(M_PI).epsilon(1e-15));
    CHECK(shot_geometry(1.0, 0.5).distance == 0.0);
    const auto pen = shot_geometry(1.0 - 11.0 / kPitchLength, 0.5);
    CHECK(pen.distance == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(pen.angle == doctest::Approx(2 * std::atan(kGoalWidth / 2 / 11.0)).epsilon(1e-12));
    // further away, narrower angle
    CHECK(shot_geometry(0.7, 0.5).angle < pen.angle);
  }

  TEST_CASE("fit recovers planted coefficients") {
    const XgModel truth{{-1.0, -0.1, 2.0}};
    auto fit = fit_xg(simulate_shots(truth, 10000, 5));
    CHECK_FALSE(fit.ridge);
    for (int k = 0; k < 3; ++k) {
      INFO("coefficient " << k);
      CHECK(std::abs(fit.model.gamma[k] - truth.gamma[k]) < 3 * fit.std_errors[k]);
      CHECK(fit.std_errors[k] > 0.0);
    }
    CHECK(fit.gradient_norm < 1e-6);
  }

  TEST_CASE("too few shots is a contract violation") {
    auto shots = simulate_shots(XgModel{}, kMinShots - 1, 1);
    CHECK_THROWS_AS(fit_xg(shots), ContractError);
  }

  TEST_CASE("separable data falls back to a ridge penalty") {
    std::vector<Shot> shots;
    for (int i = 0; i < 60; ++i) shots.push_back({i < 30 ? 0.97 : 0.62, 0.5 + 0.002 * (i % 30), i < 30});
    auto fit = fit_xg(shots);
    CHECK(fit.ridge);
    CHECK_FALSE(fit.warning.empty());
    for (double g : fit.model.gamma) CHECK(std::isfinite(g));
  }

  TEST_CASE("json round trip") {
    XgModel m{{-1.25, -0.0875, 1.5}};
    auto back = XgModel::from_json(m.to_json());
    CHECK(back.gamma == m.gamma);
    CHECK_THROWS_AS(XgModel::from_json(nlohmann::json{{"gamma", {1, 2}}}), DataError);
  }
}

TEST_SUITE("xt") {
  TEST_CASE("two-cell chain by hand") {
    const std::vector<double> s = {0.0, 1.0}, g = {0.0, 0.2}, t = {0.0, 1.0, 0.0, 0.0};
    auto one = iterate_xt(s, g, t, 1);
    CHECK(one[0] == 0.0);
    CHECK(one[1] == 0.2);
    auto two = iterate_xt(s, g, t, 2);
    CHECK(two[0] == 0.2);
    CHECK(two[1] == 0.2);
    auto solved = solve_xt(s, g, t);
    CHECK(solved.converged);
    CHECK(solved.values == two);
  }

  TEST_CASE("zero iterations is all zero") {
    const std::vector<double> s = {0.3, 0.5}, g = {0.1, 0.2}, t = {0.5, 0.5, 0.5, 0.5};
    for (double v : iterate_xt(s, g, t, 0)) CHECK(v == 0.0);
  }

  TEST_CASE("a cell that always shoots holds its xG") {
    const std::vector<double> s = {1.0, 0.2}, g = {0.3, 0.05}, t = {0.0, 1.0, 0.7, 0.3};
    for (std::size_t k = 1; k < 10; ++k) CHECK(iterate_xt(s, g, t, k)[0] == 0.3);
  }

  TEST_CASE("empty rows are absorbing with value zero") {
    const std::vector<double> s = {0.0, 0.0}, g = {0.0, 0.0}, t = {0.0, 0.0, 1.0, 0.0};
    auto r = solve_xt(s, g, t);
    CHECK(r.values == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("iteration is monotone and bounded on random grids") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + uniform_index(rng, 30);
      std::vector<double> s(n), g(n), t(n * n);
      double gmax = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = uniform(rng, 0.3, 0.9);
        g[i] = uniform(rng, 0.0, 0.6);
        gmax = std::max(gmax, g[i]);
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += t[i * n + j] = unit_uniform(rng);
        for (std::size_t j = 0; j < n; ++j) t[i * n + j] /= row;
      }
      std::vector<double> prev(n, 0.0);
      for (std::size_t k = 1; k <= 15; ++k) {
        auto cur = iterate_xt(s, g, t, k);
        for (std::size_t i = 0; i < n; ++i) {
          CHECK(cur[i] >= prev[i]);
          CHECK(cur[i] <= gmax + 1e-15);
        }
        prev = cur;
      }
      auto r = solve_xt(s, g, t);
      CHECK(r.converged);
      CHECK(r.iterations <= kXtMaxIterations);
      CHECK(r.last_change < kXtTolerance);
    }
  }

  TEST_CASE("fitted transition rows are stochastic or empty") {
    std::mt19937_64 rng(4);
    std::vector<BallMove> moves;
    for (int i = 0; i < 3000; ++i)
      moves.push_back({unit_uniform(rng), unit_uniform(rng), unit_uniform(rng), unit_uniform(rng), unit_uniform(rng) < 0.8});
    auto shots = simulate_shots(XgModel{{-1.0, -0.1, 2.0}}, 200, 5);
    auto m = fit_xt(moves, shots, XgModel{{-1.0, -0.1, 2.0}});
    const std::size_t n = m.grid.cells();
    REQUIRE(m.xt.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += m.transition[i * n + j];
      CHECK((row == 0.0 || std::abs(row - 1.0) < 1e-12));
      CHECK(m.shot_prob[i] >= 0.0);
      CHECK(m.shot_prob[i] <= 1.0);
    }
    auto back = XtModel::from_json(m.to_json());
    CHECK(back.xt == m.xt);
    CHECK(back.value_at(0.9, 0.5) == m.value_at(0.9, 0.5));
  }
}

TEST_SUITE("valuation") {
  TEST_CASE("poss-util sign follows the possession") {
    std::vector<ActionProbs> p = {probs_of({{ActionType::Cross, 0.1}, {ActionType::Pass, 0.9}}),
                                  probs_of({{ActionType::Shot, 0.2}, {ActionType::Pass, 0.8}}),
                                  probs_of({{ActionType::Cross, 0.15}, {ActionType::Shot, 0.15}, {ActionType::Pass, 0.7}})};
    CHECK(poss_util(p, true) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(poss_util(p, false) == doctest::Approx(-0.6).epsilon(1e-15));
    const std::vector<ActionType> seq = {ActionType::Pass, ActionType::Cross, ActionType::Dribble, ActionType::Cross};
    CHECK(poss_util_observed(seq) == 2.0);
    const std::vector<ActionType> none = {ActionType::Pass, ActionType::PossessionEnd};
    CHECK(poss_util_observed(none) == 0.0);
  }

  TEST_CASE("action value ladder") {
    auto p = probs_of({{ActionType::PossessionEnd, 0.2}, {ActionType::Pass, 0.3}, {ActionType::Dribble, 0.2},
                       {ActionType::Cross, 0.1}, {ActionType::Shot, 0.2}});
    CHECK(action_value(p) == doctest::Approx(5.5).epsilon(1e-15));
    CHECK(action_value(one_hot(ActionType::PossessionEnd)) == 0.0);
    CHECK(zone_value(0) == 0.0);
    CHECK(zone_value(1) == 5.0);
    CHECK(zone_value(2) == 10.0);
  }

  TEST_CASE("HAS examples") {
    CHECK(hpus_action_score(action_value(one_hot(ActionType::Pass)), zone_value(1), 1.0) == 5.0);
    CHECK(hpus_action_score(action_value(one_hot(ActionType::PossessionEnd)), zone_value(2), 1.0) == 0.0);
    CHECK_THROWS_AS(hpus_action_score(5, 5, 0.0), ContractError);
  }

  TEST_CASE("HPUS weights recent actions most") {
    const auto areas = default_areas();
    std::vector<ActionProbs> p = {one_hot(ActionType::Pass), one_hot(ActionType::Shot)};
    std::vector<std::pair<double, double>> loc = {{0.8, 0.1}, {0.95, 0.5}};
    const int a0 = areas.zone_of(0.8, 0.1), a1 = areas.zone_of(0.95, 0.5);
    CHECK(a0 == 1);
    CHECK(a1 == 2);
    std::vector<double> t = {1.0, 1.0};
    auto r = hpus(p, loc, areas, inverse_recency, t);
    CHECK(r.hpus == doctest::Approx(0.5 * 5.0 + 1.0 * 10.0).epsilon(1e-15));
    auto flat = hpus(p, loc, areas, [](std::size_t) { return 1.0; }, t);
    CHECK(flat.hpus == doctest::Approx(15.0).epsilon(1e-15));
  }

  TEST_CASE("LAV examples") {
    auto p = probs_of({{ActionType::Shot, 0.3}, {ActionType::Pass, 0.4}, {ActionType::Cross, 0.2},
                       {ActionType::PossessionEnd, 0.1}});
    CHECK(lav(p, 0.7, 0.4, flat_xg(0.1), flat_xt(0.05)) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(lav(one_hot(ActionType::PossessionEnd), 0.9, 0.5, flat_xg(0.4), flat_xt(0.2)) == 0.0);
    const XgModel xg{{-1.0, -0.1, 2.0}};
    const double spot = 1.0 - 11.0 / kPitchLength;
    CHECK(lav_observed(ActionType::Shot, spot, 0.5, xg, flat_xt(0.3)) == xg.prob(spot, 0.5));
    CHECK(lav_observed(ActionType::Dribble, 0.2, 0.2, xg, flat_xt(0.03)) == 0.03);
    CHECK(lav_observed(ActionType::Goal, 0.99, 0.5, xg, flat_xt(0.3)) == 0.0);
  }

  TEST_CASE("LAV grows with shot mass moved from loss when xG exceeds xT") {
    const auto xg = flat_xg(0.2);
    const auto xt = flat_xt(0.05);
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
      auto p = probs_of({{ActionType::Shot, 0.05 * k}, {ActionType::PossessionEnd, 0.5 - 0.05 * k}, {ActionType::Pass, 0.5}});
      const double v = lav(p, 0.8, 0.5, xg, xt);
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("one-hot perfect predictions value like the observations") {
    std::mt19937_64 rng(8);
    ValuationModels models{XgModel{{-1.0, -0.1, 2.0}}, flat_xt(0.0)};
    for (std::size_t c = 0; c < models.xt.grid.cells(); ++c) models.xt.xt[c] = unit_uniform(rng) * 0.1;
    for (int trial = 0; trial < 50; ++trial) {
      Possession pos;
      const std::size_t len = 1 + uniform_index(rng, 8);
      for (std::size_t i = 0; i < len; ++i)
        pos.events.push_back(ev("m", "A", kAllActions[uniform_index(rng, 6)], unit_uniform(rng), unit_uniform(rng)));
      const std::size_t first = uniform_index(rng, len);
      std::vector<Prediction> preds;
      for (std::size_t i = first; i < len; ++i) {
        Prediction pr;
        pr.action_probs = one_hot(pos.events[i].action);
        pr.x = pos.events[i].x;
        pr.y = pos.events[i].y;
        preds.push_back(pr);
      }
      auto v = value_possession(pos, first, preds, models);
      CHECK(v.lpv_pred == v.lpv_obs);
      CHECK(v.hpus_pred == v.hpus_obs);
      CHECK(v.poss_util_pred == v.poss_util_obs);
      for (const auto& a : v.actions) CHECK(a.lav_pred == a.lav_obs);
    }
  }

  TEST_CASE("single action possession and rel_diff") {
    ValuationModels models{flat_xg(0.1), flat_xt(0.05)};
    Possession pos;
    pos.events = {ev("m", "A", ActionType::Shot, 0.9, 0.5)};
    Prediction pr;
    pr.action_probs = probs_of({{ActionType::Shot, 0.5}, {ActionType::Pass, 0.5}});
    pr.x = 0.9;
    pr.y = 0.5;
    auto v = value_possession(pos, 0, std::vector<Prediction>{pr}, models);
    CHECK(v.lpv_pred == v.actions[0].lav_pred);
    CHECK(v.lpv_pred == doctest::Approx(0.075).epsilon(1e-14));
    CHECK(v.lpv_obs == doctest::Approx(0.1).epsilon(1e-14));
    REQUIRE(v.rel_diff.has_value());
    CHECK(*v.rel_diff == doctest::Approx((0.075 - 0.1) / 0.075).epsilon(1e-14));

    // pred 0.10 against obs 0.06
    pos.events = {ev("m", "A", ActionType::Pass, 0.5, 0.5)};
    pr.action_probs = probs_of({{ActionType::Shot, 1.0}});
    auto w = value_possession(pos, 0, std::vector<Prediction>{pr}, ValuationModels{flat_xg(0.1), flat_xt(0.06)});
    REQUIRE(w.rel_diff.has_value());
    CHECK(*w.rel_diff == doctest::Approx(0.4).epsilon(1e-14));

    // nothing predicted of value: rel_diff unavailable
    pr.action_probs = one_hot(ActionType::PossessionEnd);
    auto z = value_possession(pos, 0, std::vector<Prediction>{pr}, models);
    CHECK_FALSE(z.rel_diff.has_value());
  }

  TEST_CASE("predicted locations are clamped") {
    ValuationModels models{XgModel{{-1.0, -0.1, 2.0}}, flat_xt(0.05)};
    Possession pos;
    pos.events = {ev("m", "A", ActionType::Shot, 0.9, 0.5)};
    Prediction pr;
    pr.action_probs = one_hot(ActionType::Shot);
    pr.x = 1.7;
    pr.y = -0.3;
    auto v = value_possession(pos, 0, std::vector<Prediction>{pr}, models);
    CHECK(v.actions[0].pred_x == 1.0);
    CHECK(v.actions[0].pred_y == 0.0);
    CHECK(v.lpv_pred == models.xg.prob(1.0, 0.0));
  }
}

TEST_SUITE("report") {
  TEST_CASE("pearson by hand") {
    CHECK(*pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(*pearson({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK_FALSE(pearson({1}, {2}).has_value());
    CHECK(format_number(std::optional<double>{}) == "NA");
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(-0.0) == "0");
  }

  TEST_CASE("aggregation, correlations and next-match pairs") {
    std::vector<MatchEvent> events;
    std::vector<ValuedPossession> valued;
    const double lpv[3][2] = {{0.3, 0.1}, {0.5, 0.2}, {0.2, 0.6}};
    for (int m = 0; m < 3; ++m) {
      const std::string id = "M" + std::to_string(m);
      events.push_back(ev(id, "A", ActionType::Pass));
      events.push_back(ev(id, "B", ActionType::Pass));
      for (int g = 0; g < m; ++g) events.push_back(ev(id, "A", ActionType::Goal));
      valued.push_back(vp(id, "A", lpv[m][0], lpv[m][0] / 2));
      valued.push_back(vp(id, "A", 0.1, 0.0));
      valued.push_back(vp(id, "B", lpv[m][1], 0.0));
    }
    auto rep = aggregate_and_correlate(valued, events);
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.rows[0].team_id == "A");
    CHECK(rep.rows[0].possessions == 2);
    CHECK(rep.rows[0].lpv_pred == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(rep.rows[2].goals == 1.0);
    CHECK(rep.rows[4].goals == 2.0);
    CHECK(rep.rows[5].goals == 0.0);

    // identical columns correlate perfectly; diagonal is 1
    for (std::size_t i = 0; i < rep.same_match.rows.size(); ++i) {
      if (rep.same_match.values[i][i]) CHECK(*rep.same_match.values[i][i] == doctest::Approx(1.0));
    }
    auto idx = [&](const std::vector<std::string>& v, const std::string& s) {
      return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
    };
    const auto lp = idx(rep.same_match.rows, "lpv_pred"), hp = idx(rep.same_match.rows, "hpus_pred");
    CHECK(*rep.same_match.values[lp][hp] == doctest::Approx(1.0).epsilon(1e-14));

    // two teams with three matches: four pairs
    CHECK(rep.next_match.cols.front() == "next_goals");
    const auto g = idx(rep.next_match.rows, "goals");
    REQUIRE(rep.next_match.values[g][0].has_value());
    // pairs (A:0->1, A:1->2, B:0->1, B:1->2): goals (0,1,0,0) vs next goals (1,2,0,0)
    CHECK(*rep.next_match.values[g][0] == doctest::Approx(*pearson({0, 1, 0, 0}, {1, 2, 0, 0})).epsilon(1e-14));

    std::ostringstream csv;
    write_team_match_csv(csv, rep.rows);
    CHECK(csv.str().rfind("match_id,team_id", 0) == 0);
  }

  TEST_CASE("a single match cannot be correlated") {
    std::vector<MatchEvent> events = {ev("M0", "A", ActionType::Pass)};
    std::vector<ValuedPossession> valued = {vp("M0", "A", 0.2, 0.1)};
    CHECK_THROWS_AS(aggregate_and_correlate(valued, events), ContractError);
  }

  TEST_CASE("outcome table") {
    std::istringstream in("match_id,team_id,goals,external_xg\nM0,A,2,1.35\nM0,B,0,\n");
    auto t = read_outcomes(in);
    REQUIRE(t.size() == 2);
    CHECK(t.at({"M0", "A"}).goals == 2.0);
    CHECK(*t.at({"M0", "A"}).external_xg == 1.35);
    CHECK_FALSE(t.at({"M0", "B"}).external_xg.has_value());
    std::istringstream bad("match_id,goals\nM0,1\n");
    CHECK_THROWS_AS(read_outcomes(bad), DataError);
    std::istringstream junk("match_id,team_id,goals\nM0,A,two\n");
    CHECK_THROWS_AS(read_outcomes(junk), DataError);
  }
}
