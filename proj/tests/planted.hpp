#pragma once

#include <random>
#include <vector>

#include "possig/dataset.hpp"
#include "possig/random.hpp"

namespace planted {

// Next style action as a function of the last one.
inline possig::ActionType next_action(possig::ActionType last) {
  using possig::ActionType;
  switch (last) {
    case ActionType::Pass: return ActionType::Dribble;
    case ActionType::Dribble: return ActionType::Cross;
    case ActionType::Cross: return ActionType::Shot;
    default: return ActionType::Pass;
  }
}

// Samples from random possessions whose target action follows next_action()
// and whose target location is a fixed linear map of the level-1
// log-signature coordinates (the x, y, T displacements of the prefix).
inline std::vector<possig::Sample> samples(std::size_t n, int n_r, std::uint64_t seed, double noise = 0.0) {
  using namespace possig;
  std::mt19937_64 rng(seed);
  std::vector<Sample> out;
  out.reserve(n);
  while (out.size() < n) {
    Possession p;
    const std::size_t len = static_cast<std::size_t>(n_r) + 1 + uniform_index(rng, 4);
    double x = uniform(rng, 0.2, 0.8), y = uniform(rng, 0.2, 0.8), t = uniform(rng, 0.0, 0.5);
    for (std::size_t i = 0; i < len; ++i) {
      MatchEvent e;
      e.match_id = "syn" + std::to_string(out.size() % 10);
      e.team_id = "A";
      e.action = kAllActions[uniform_index(rng, 4)];
      e.x = x;
      e.y = y;
      e.t = t;
      e.scrad = static_cast<int>(uniform_index(rng, 3)) - 1;
      p.events.push_back(e);
      x = std::clamp(x + uniform(rng, -0.12, 0.12), 0.0, 1.0);
      y = std::clamp(y + uniform(rng, -0.12, 0.12), 0.0, 1.0);
      t = std::min(1.0, t + uniform(rng, 0.0, 0.02));
    }
    auto s = build_samples(p, n_r).back();
    const double dx = s.logsig[0], dy = s.logsig[1], dt = s.logsig[2];
    s.target_action = next_action(s.recent_actions.front());
    s.target_x = 0.5 + 0.6 * dx - 0.2 * dy + noise * standard_normal(rng);
    s.target_y = 0.5 + 0.5 * dy + 2.0 * dt + noise * standard_normal(rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace planted
