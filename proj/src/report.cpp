#include "possig/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "possig/errors.hpp"

namespace possig {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("outcomes line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

OutcomeTable read_outcomes(std::istream& in) {
  OutcomeTable table;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
      for (const char* need : {"match_id", "team_id", "goals"})
        if (!col.count(need)) throw DataError(std::string("outcomes: missing column '") + need + "'");
      continue;
    }
    auto get = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= fields.size()) return {};
      return fields[it->second];
    };
    Outcome o;
    o.goals = parse_double(get("goals"), line_no);
    const auto xg = get("external_xg");
    if (!xg.empty() && xg != "NA") o.external_xg = parse_double(xg, line_no);
    table[{get("match_id"), get("team_id")}] = o;
  }
  return table;
}

std::vector<TeamMatchRow> aggregate(const std::vector<ValuedPossession>& valued, const std::vector<MatchEvent>& events,
                                    const OutcomeTable* outcomes) {
  // match order and teams from the events
  std::vector<std::string> matches;
  std::map<std::string, std::vector<std::string>> teams;
  std::map<std::pair<std::string, std::string>, double> goals;
  for (const auto& e : events) {
    if (teams.find(e.match_id) == teams.end()) matches.push_back(e.match_id);
    auto& t = teams[e.match_id];
    if (e.action != ActionType::MatchEnd && std::find(t.begin(), t.end(), e.team_id) == t.end()) t.push_back(e.team_id);
    if (e.action == ActionType::Goal) goals[{e.match_id, e.team_id}] += 1.0;
  }

  std::map<std::pair<std::string, std::string>, TeamMatchRow> acc;
  for (const auto& vp : valued) {
    auto& r = acc[{vp.match_id, vp.team_id}];
    ++r.possessions;
    r.lpv_pred += vp.lpv_pred;
    r.lpv_obs += vp.lpv_obs;
    r.hpus_pred += vp.hpus_pred;
    r.hpus_obs += vp.hpus_obs;
    r.poss_util_pred += vp.poss_util_pred;
    r.poss_util_obs += vp.poss_util_obs;
    if (vp.rel_diff) r.rel_diff += *vp.rel_diff;
  }

  std::vector<TeamMatchRow> rows;
  for (const auto& m : matches) {
    auto ts = teams[m];
    std::sort(ts.begin(), ts.end());
    for (const auto& t : ts) {
      TeamMatchRow r = acc[{m, t}];
      r.match_id = m;
      r.team_id = t;
      r.goals = goals[{m, t}];
      if (outcomes) {
        if (auto it = outcomes->find({m, t}); it != outcomes->end()) {
          r.goals = it->second.goals;
          r.external_xg = it->second.external_xg;
        }
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::string> metric_columns(const std::vector<TeamMatchRow>& rows) {
  std::vector<std::string> cols = {"lpv_pred", "lpv_obs",       "hpus_pred",     "hpus_obs",
                                   "poss_util_pred", "poss_util_obs", "rel_diff", "goals"};
  const bool xg = !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.external_xg.has_value(); });
  if (xg) cols.push_back("external_xg");
  return cols;
}

double column_value(const TeamMatchRow& r, const std::string& c) {
  if (c == "lpv_pred") return r.lpv_pred;
  if (c == "lpv_obs") return r.lpv_obs;
  if (c == "hpus_pred") return r.hpus_pred;
  if (c == "hpus_obs") return r.hpus_obs;
  if (c == "poss_util_pred") return r.poss_util_pred;
  if (c == "poss_util_obs") return r.poss_util_obs;
  if (c == "rel_diff") return r.rel_diff;
  if (c == "goals") return r.goals;
  if (c == "external_xg") return r.external_xg.value_or(NAN);
  throw ContractError("unknown metric column '" + c + "'");
}

CorrelationTable correlate(const std::vector<TeamMatchRow>& rows) {
  CorrelationTable t;
  t.rows = metric_columns(rows);
  t.cols = t.rows;
  std::vector<std::vector<double>> data;
  for (const auto& c : t.cols) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(column_value(r, c));
    data.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::optional<double>> line;
    for (std::size_t j = 0; j < data.size(); ++j) line.push_back(pearson(data[i], data[j]));
    t.values.push_back(std::move(line));
  }
  return t;
}

CorrelationTable future_correlations(const std::vector<TeamMatchRow>& rows) {
  CorrelationTable t;
  t.rows = metric_columns(rows);
  t.cols = {"next_goals", "next_lpv_pred"};
  const bool xg = std::find(t.rows.begin(), t.rows.end(), "external_xg") != t.rows.end();
  if (xg) t.cols.insert(t.cols.begin() + 1, "next_external_xg");

  // rows are in match order; chain each team's appearances
  std::map<std::string, std::vector<const TeamMatchRow*>> by_team;
  for (const auto& r : rows) by_team[r.team_id].push_back(&r);
  std::vector<const TeamMatchRow*> cur;
  std::vector<const TeamMatchRow*> next;
  for (const auto& [team, list] : by_team) {
    for (std::size_t k = 0; k + 1 < list.size(); ++k) {
      cur.push_back(list[k]);
      next.push_back(list[k + 1]);
    }
  }

  auto next_value = [&](const TeamMatchRow& r, const std::string& c) {
    if (c == "next_goals") return r.goals;
    if (c == "next_external_xg") return r.external_xg.value_or(NAN);
    return r.lpv_pred;
  };
  for (const auto& rc : t.rows) {
    std::vector<double> x;
    for (auto* r : cur) x.push_back(column_value(*r, rc));
    std::vector<std::optional<double>> line;
    for (const auto& cc : t.cols) {
      std::vector<double> y;
      for (auto* r : next) y.push_back(next_value(*r, cc));
      line.push_back(pearson(x, y));
    }
    t.values.push_back(std::move(line));
  }
  return t;
}

Report aggregate_and_correlate(const std::vector<ValuedPossession>& valued, const std::vector<MatchEvent>& events,
                               const OutcomeTable* outcomes) {
  Report rep;
  rep.rows = aggregate(valued, events, outcomes);
  std::set<std::string> matches;
  for (const auto& r : rep.rows) matches.insert(r.match_id);
  require(matches.size() >= 2, "aggregate_and_correlate: need at least 2 matches");
  rep.same_match = correlate(rep.rows);
  rep.next_match = future_correlations(rep.rows);
  return rep;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

void write_team_match_csv(std::ostream& out, const std::vector<TeamMatchRow>& rows) {
  out << "match_id,team_id,possessions,lpv_pred,lpv_obs,hpus_pred,hpus_obs,poss_util_pred,poss_util_obs,rel_diff,goals,"
         "external_xg\n";
  for (const auto& r : rows) {
    out << r.match_id << ',' << r.team_id << ',' << r.possessions << ',' << format_number(r.lpv_pred) << ','
        << format_number(r.lpv_obs) << ',' << format_number(r.hpus_pred) << ',' << format_number(r.hpus_obs) << ','
        << format_number(r.poss_util_pred) << ',' << format_number(r.poss_util_obs) << ','
        << format_number(r.rel_diff) << ',' << format_number(r.goals) << ',' << format_number(r.external_xg) << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const CorrelationTable& t) {
  out << "metric";
  for (const auto& c : t.cols) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out << t.rows[i];
    for (const auto& v : t.values[i]) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_valued_possessions_csv(std::ostream& out, const std::vector<ValuedPossession>& valued) {
  out << "match_id,team_id,possession,n_valued,lpv_pred,lpv_obs,hpus_pred,hpus_obs,poss_util_pred,poss_util_obs,"
         "rel_diff\n";
  for (const auto& v : valued) {
    out << v.match_id << ',' << v.team_id << ',' << v.possession << ',' << v.actions.size() << ','
        << format_number(v.lpv_pred) << ',' << format_number(v.lpv_obs) << ',' << format_number(v.hpus_pred) << ','
        << format_number(v.hpus_obs) << ',' << format_number(v.poss_util_pred) << ','
        << format_number(v.poss_util_obs) << ',' << format_number(v.rel_diff) << '\n';
  }
}

void write_valued_actions_csv(std::ostream& out, const std::vector<ValuedPossession>& valued) {
  out << "match_id,team_id,possession,position,action";
  for (auto a : kAllActions) out << ",p_" << (a == ActionType::PossessionEnd ? std::string("end")
                                              : a == ActionType::MatchEnd    ? std::string("match_end")
                                                                             : std::string(1, action_code(a)));
  out << ",pred_x,pred_y,obs_x,obs_y,lav_pred,lav_obs,av_pred,av_obs,zv_pred,zv_obs,has_pred,has_obs\n";
  for (const auto& v : valued) {
    for (const auto& a : v.actions) {
      out << v.match_id << ',' << v.team_id << ',' << v.possession << ',' << a.position << ',' << action_code(a.action);
      for (double p : a.probs) out << ',' << format_number(p);
      for (double x : {a.pred_x, a.pred_y, a.obs_x, a.obs_y, a.lav_pred, a.lav_obs, a.av_pred, a.av_obs, a.zv_pred,
                       a.zv_obs, a.has_pred, a.has_obs})
        out << ',' << format_number(x);
      out << '\n';
    }
  }
}

}  // namespace possig
