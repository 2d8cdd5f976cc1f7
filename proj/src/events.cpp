#include "possig/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"

namespace possig {

using nlohmann::json;

char action_code(ActionType a) {
  switch (a) {
    case ActionType::Pass: return 'p';
    case ActionType::Dribble: return 'd';
    case ActionType::Cross: return 'x';
    case ActionType::Shot: return 's';
    case ActionType::Goal: return 'g';
    case ActionType::PossessionEnd: return '_';
    case ActionType::MatchEnd: return '@';
  }
  return '?';
}

std::optional<ActionType> action_from_code(std::string_view code) {
  if (code.size() != 1) return std::nullopt;
  for (auto a : kAllActions)
    if (action_code(a) == code[0]) return a;
  return std::nullopt;
}

bool is_style_action(ActionType a) {
  return a == ActionType::Pass || a == ActionType::Dribble || a == ActionType::Cross || a == ActionType::Shot;
}

namespace {

// Nominal period lengths in seconds: two halves, two extra-time halves.
double period_offset(int period) {
  static constexpr double kLengths[] = {2700.0, 2700.0, 900.0, 900.0};
  double offset = 0.0;
  for (int p = 1; p < period; ++p) offset += p <= 4 ? kLengths[p - 1] : 0.0;
  return offset;
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError("id must be a string or integer");
}

double number_field(const json& rec, const char* name) {
  auto it = rec.find(name);
  if (it == rec.end()) throw DataError(std::string("missing field '") + name + "'");
  if (!it->is_number()) throw DataError(std::string("field '") + name + "' is not a number");
  double v = it->get<double>();
  if (!std::isfinite(v)) throw DataError(std::string("field '") + name + "' is not finite");
  return v;
}

double unit_coord(double raw, double extent, const char* name) {
  if (!(extent > 0.0)) throw DataError(std::string("non-positive pitch extent for ") + name);
  const double v = raw / extent;
  if (v < -1e-9 || v > 1.0 + 1e-9) throw DataError(std::string(name) + " outside the pitch");
  return std::clamp(v, 0.0, 1.0);
}

MatchEvent parse_record(const json& rec) {
  if (!rec.is_object()) throw DataError("record is not a JSON object");
  MatchEvent ev;
  for (const char* f : {"match_id", "team_id", "action"})
    if (!rec.contains(f)) throw DataError(std::string("missing field '") + f + "'");
  ev.match_id = id_string(rec["match_id"]);
  ev.team_id = id_string(rec["team_id"]);
  if (!rec["action"].is_string()) throw DataError("field 'action' is not a string");
  const auto code = rec["action"].get<std::string>();
  auto action = action_from_code(code);
  if (!action) throw DataError("unknown action code '" + code + "'");
  ev.action = *action;

  const double length = rec.contains("pitch_length") ? number_field(rec, "pitch_length") : 105.0;
  const double width = rec.contains("pitch_width") ? number_field(rec, "pitch_width") : 68.0;
  ev.x = unit_coord(number_field(rec, "x_raw"), length, "x_raw");
  ev.y = unit_coord(number_field(rec, "y_raw"), width, "y_raw");

  if (auto it = rec.find("attacking_direction"); it != rec.end()) {
    if (!it->is_string()) throw DataError("field 'attacking_direction' is not a string");
    const auto dir = it->get<std::string>();
    if (dir == "rtl") {
      ev.x = 1.0 - ev.x;
      ev.y = 1.0 - ev.y;
    } else if (dir != "ltr") {
      throw DataError("attacking_direction must be 'ltr' or 'rtl'");
    }
  }

  const double t = number_field(rec, "t_raw_sec");
  if (t < 0.0) throw DataError("negative t_raw_sec");
  int period = 1;
  if (rec.contains("period")) {
    if (!rec["period"].is_number_integer()) throw DataError("field 'period' is not an integer");
    period = rec["period"].get<int>();
    if (period < 1) throw DataError("period must be >= 1");
  }
  ev.raw_time = period_offset(period) + t;
  if (auto it = rec.find("competition"); it != rec.end() && it->is_string()) ev.competition = it->get<std::string>();
  return ev;
}

}  // namespace

IngestResult ingest_events(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = json::parse(line);
      result.events.push_back(parse_record(rec));
    } catch (const json::exception& e) {
      result.rejected.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const DataError& e) {
      result.rejected.push_back({line_no, e.what()});
    }
  }

  // file order per match, to detect non-monotone clocks
  std::map<std::string, double> last_time;
  std::set<std::string> warned;
  for (const auto& ev : result.events) {
    auto [it, fresh] = last_time.try_emplace(ev.match_id, ev.raw_time);
    if (!fresh) {
      if (ev.raw_time < it->second && warned.insert(ev.match_id).second)
        result.warnings.push_back("match " + ev.match_id + ": non-monotone timestamps, events re-sorted");
      it->second = std::max(it->second, ev.raw_time);
    }
  }

  std::stable_sort(result.events.begin(), result.events.end(), [](const MatchEvent& a, const MatchEvent& b) {
    if (a.match_id != b.match_id) return a.match_id < b.match_id;
    return a.raw_time < b.raw_time;
  });

  std::map<std::string, double> max_time;
  for (const auto& ev : result.events) {
    auto& m = max_time[ev.match_id];
    m = std::max(m, ev.raw_time);
  }

  std::map<std::string, std::map<std::string, int>> goals;
  std::map<std::string, int> total_goals;
  for (auto& ev : result.events) {
    const double m = max_time[ev.match_id];
    ev.t = m > 0.0 ? ev.raw_time / m : 0.0;
    auto& team_goals = goals[ev.match_id][ev.team_id];
    ev.scrad = team_goals - (total_goals[ev.match_id] - team_goals);
    if (ev.action == ActionType::Goal) {
      ++team_goals;
      ++total_goals[ev.match_id];
    }
  }
  return result;
}

IngestResult ingest_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open events file '" + path + "'");
  return ingest_events(in);
}

void export_events(std::ostream& out, const std::vector<MatchEvent>& events) {
  for (const auto& ev : events) {
    json rec = {
        {"match_id", ev.match_id},
        {"team_id", ev.team_id},
        {"action", std::string(1, action_code(ev.action))},
        {"x_raw", ev.x},
        {"y_raw", ev.y},
        {"t_raw_sec", ev.t},
        {"period", 1},
        {"pitch_length", 1.0},
        {"pitch_width", 1.0},
    };
    if (!ev.competition.empty()) rec["competition"] = ev.competition;
    out << rec.dump() << '\n';
  }
}

std::vector<Possession> segment_possessions(const std::vector<MatchEvent>& events) {
  std::vector<Possession> out;
  Possession cur;
  auto close = [&](PossessionEnd how) {
    if (cur.events.empty()) return;
    cur.terminal = how;
    out.push_back(std::move(cur));
    cur = Possession{};
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (ev.action == ActionType::MatchEnd) {
      close(PossessionEnd::MatchEnd);
      continue;
    }
    if (!cur.events.empty() && ev.team_id != cur.team_id()) close(PossessionEnd::TeamChange);
    if (cur.events.empty()) cur.first_index = i;
    cur.events.push_back(ev);
    if (ev.action == ActionType::PossessionEnd) close(PossessionEnd::Loss);
    else if (ev.action == ActionType::Goal) close(PossessionEnd::Goal);
  }
  close(PossessionEnd::EndOfData);
  return out;
}

std::vector<std::vector<MatchEvent>> group_by_match(const std::vector<MatchEvent>& events) {
  std::vector<std::vector<MatchEvent>> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& ev : events) {
    auto [it, fresh] = slot.try_emplace(ev.match_id, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(ev);
  }
  return out;
}

}  // namespace possig
