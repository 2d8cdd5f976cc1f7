#include "possig/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"
#include "possig/random.hpp"

namespace possig {

using nlohmann::json;

std::vector<Sample> build_samples(const Possession& possession, int n_r, std::size_t sig_order,
                                  std::size_t possession_index) {
  require(n_r >= kMinRecent && n_r <= kMaxRecent, "build_samples: n_r must be in [3, 7]");
  std::vector<Sample> out;
  const auto& evs = possession.events;
  const std::size_t nr = static_cast<std::size_t>(n_r);
  if (evs.size() < nr + 1) return out;

  std::vector<PointXYT> path;
  path.reserve(evs.size());
  for (std::size_t i = 0; i < nr - 1; ++i) path.push_back({evs[i].x, evs[i].y, evs[i].t});

  for (std::size_t len = nr; len < evs.size(); ++len) {
    const auto& last = evs[len - 1];
    path.push_back({last.x, last.y, last.t});
    const auto& target = evs[len];
    if (target.action == ActionType::MatchEnd) break;

    Sample s;
    s.logsig = logsig_of_possession(path, sig_order).coeffs;
    s.recent_actions.reserve(nr);
    for (std::size_t k = 0; k < nr; ++k) s.recent_actions.push_back(evs[len - 1 - k].action);
    s.scrad = last.scrad;
    s.target_action = target.action;
    s.target_x = target.x;
    s.target_y = target.y;
    s.match_id = last.match_id;
    s.team_id = last.team_id;
    s.possession = possession_index;
    s.position = len;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> build_dataset(const std::vector<MatchEvent>& events, int n_r, std::size_t sig_order) {
  std::vector<Sample> out;
  for (const auto& match : group_by_match(events)) {
    auto possessions = segment_possessions(match);
    for (std::size_t p = 0; p < possessions.size(); ++p) {
      auto samples = build_samples(possessions[p], n_r, sig_order, p);
      std::move(samples.begin(), samples.end(), std::back_inserter(out));
    }
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_train_test(
    const std::vector<std::string>& matches, std::uint64_t seed, double ratio) {
  require(matches.size() >= 2, "split_train_test: need at least 2 matches");
  require(ratio > 0.0 && ratio < 1.0, "split_train_test: ratio must be in (0, 1)");
  std::vector<std::string> order = matches;
  std::mt19937_64 rng(seed);
  shuffle(order, rng);

  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(order.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);
  std::vector<std::string> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::string> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return {std::move(train), std::move(test)};
}

std::vector<std::string> match_ids(const std::vector<Sample>& samples) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : samples)
    if (seen.insert(s.match_id).second) out.push_back(s.match_id);
  return out;
}

std::vector<std::string> match_ids(const std::vector<MatchEvent>& events) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : events)
    if (seen.insert(e.match_id).second) out.push_back(e.match_id);
  return out;
}

std::vector<Sample> select_matches(const std::vector<Sample>& samples, const std::vector<std::string>& matches) {
  const std::set<std::string> keep(matches.begin(), matches.end());
  std::vector<Sample> out;
  for (const auto& s : samples)
    if (keep.count(s.match_id)) out.push_back(s);
  return out;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  json samples = json::array();
  for (const auto& s : ds.samples) {
    std::string recent;
    for (auto a : s.recent_actions) recent.push_back(action_code(a));
    samples.push_back({{"match_id", s.match_id},
                       {"team_id", s.team_id},
                       {"possession", s.possession},
                       {"position", s.position},
                       {"logsig", s.logsig},
                       {"recent", recent},
                       {"scrad", s.scrad},
                       {"target", std::string(1, action_code(s.target_action))},
                       {"target_xy", {s.target_x, s.target_y}}});
  }
  json doc = {{"format", "possig-samples"},
              {"version", kDatasetVersion},
              {"n_r", ds.n_r},
              {"sig_order", ds.sig_order},
              {"logsig_dim", witt_dimension(kAugmentedDim, ds.sig_order)},
              {"samples", samples}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset '" + path + "'");
  out << doc.dump() << '\n';
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  try {
    auto doc = json::parse(in);
    if (doc.at("format") != "possig-samples") throw DataError("'" + path + "' is not a sample dataset");
    if (doc.at("version").get<int>() != kDatasetVersion)
      throw DataError("dataset '" + path + "': unsupported version");
    Dataset ds;
    ds.n_r = doc.at("n_r").get<int>();
    ds.sig_order = doc.at("sig_order").get<std::size_t>();
    const auto dim = witt_dimension(kAugmentedDim, ds.sig_order);
    for (const auto& j : doc.at("samples")) {
      Sample s;
      s.match_id = j.at("match_id").get<std::string>();
      s.team_id = j.at("team_id").get<std::string>();
      s.possession = j.at("possession").get<std::size_t>();
      s.position = j.at("position").get<std::size_t>();
      s.logsig = j.at("logsig").get<std::vector<double>>();
      if (s.logsig.size() != dim) throw DataError("dataset '" + path + "': log-signature length mismatch");
      for (char c : j.at("recent").get<std::string>()) {
        auto a = action_from_code(std::string_view(&c, 1));
        if (!a) throw DataError("dataset '" + path + "': bad action code");
        s.recent_actions.push_back(*a);
      }
      s.scrad = j.at("scrad").get<int>();
      auto t = action_from_code(j.at("target").get<std::string>());
      if (!t) throw DataError("dataset '" + path + "': bad target action");
      s.target_action = *t;
      s.target_x = j.at("target_xy").at(0).get<double>();
      s.target_y = j.at("target_xy").at(1).get<double>();
      ds.samples.push_back(std::move(s));
    }
    return ds;
  } catch (const json::exception& e) {
    throw DataError("dataset '" + path + "': " + e.what());
  }
}

}  // namespace possig
