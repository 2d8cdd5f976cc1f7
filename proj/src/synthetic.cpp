#include "possig/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "possig/errors.hpp"
#include "possig/random.hpp"
#include "possig/xg.hpp"

namespace possig {

namespace {

using nlohmann::json;

constexpr double kHalfSeconds = 2700.0;

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double clamp_unit(double v) { return std::clamp(v, 0.01, 0.99); }

struct MatchWriter {
  std::vector<json>& out;
  std::string match_id;
  std::string home;
  double clock = 0.0;

  void emit(const std::string& team, char action, double x, double y) {
    const int period = clock < kHalfSeconds ? 1 : 2;
    // home attacks left to right in the first half, teams swap at half time
    const bool ltr = (team == home) == (period == 1);
    const double ux = ltr ? x : 1.0 - x;
    const double uy = ltr ? y : 1.0 - y;
    out.push_back({{"match_id", match_id},
                   {"team_id", team},
                   {"action", std::string(1, action)},
                   {"x_raw", round2(ux * kPitchLength)},
                   {"y_raw", round2(uy * kPitchWidth)},
                   {"t_raw_sec", round2(period == 1 ? clock : clock - kHalfSeconds)},
                   {"period", period},
                   {"attacking_direction", ltr ? "ltr" : "rtl"}});
  }
};

}  // namespace

std::vector<json> synthetic_events(const SyntheticConfig& cfg) {
  require(cfg.teams >= 2, "synthetic_events: need at least 2 teams");
  require(cfg.matches >= 1 && cfg.possessions_per_match >= 2, "synthetic_events: empty corpus");
  std::mt19937_64 rng(cfg.seed);

  std::vector<double> strength(cfg.teams);
  for (auto& s : strength) s = uniform(rng, 0.8, 1.2);
  // shot quality used to draw goals: intercept, distance (m), angle (rad)
  const XgModel truth{{-1.2, -0.09, 1.1}};

  std::vector<json> out;
  const double match_seconds = 2.0 * kHalfSeconds;
  const double step = match_seconds / (static_cast<double>(cfg.possessions_per_match) * 7.0);

  for (std::size_t m = 0; m < cfg.matches; ++m) {
    const std::size_t home = m % cfg.teams;
    const std::size_t away = (home + 1 + (m / cfg.teams) % (cfg.teams - 1)) % cfg.teams;
    const std::size_t idx[2] = {home, away};
    char id[16];
    std::snprintf(id, sizeof(id), "M%03zu", m + 1);
    MatchWriter w{out, id, "T" + std::to_string(home + 1)};
    std::size_t side = 0;

    for (std::size_t p = 0; p < cfg.possessions_per_match; ++p) {
      const std::size_t ti = idx[side];
      const std::string team = "T" + std::to_string(ti + 1);
      const double s = strength[ti];
      double x = uniform(rng, 0.05, 0.45);
      double y = uniform(rng, 0.1, 0.9);

      for (int k = 0; k < 14; ++k) {
        const bool wide = y < 0.25 || y > 0.75;
        const double u = unit_uniform(rng);
        char action = 'p';
        if (x > 0.72 && !wide && u < 0.45) action = 's';
        else if (x > 0.7 && wide && u < 0.4) action = 'x';
        else if (u < 0.7) action = 'p';
        else action = 'd';
        w.emit(team, action, x, y);
        w.clock += uniform(rng, 0.5, 1.5) * step;

        if (action == 's') {
          if (unit_uniform(rng) < truth.prob(x, y)) {
            w.emit(team, 'g', 1.0, 0.5);
          } else {
            w.emit(team, '_', uniform(rng, 0.9, 0.99), uniform(rng, 0.4, 0.6));
          }
          break;
        }

        double loss = 0.12 / s;
        if (action == 'x') {
          x = uniform(rng, 0.85, 0.97);
          y = uniform(rng, 0.35, 0.65);
          loss = 0.35;
        } else if (action == 'd') {
          x = clamp_unit(x + uniform(rng, 0.0, 0.08) * s);
          y = clamp_unit(y + 0.04 * standard_normal(rng));
        } else {
          x = clamp_unit(x + uniform(rng, -0.05, 0.2) * s);
          y = clamp_unit(y + 0.12 * standard_normal(rng));
        }
        if (unit_uniform(rng) < loss || k == 13) {
          w.emit(team, '_', x, y);
          break;
        }
      }
      w.clock += uniform(rng, 0.5, 1.5) * step;
      side = 1 - side;
    }
    w.clock = std::max(w.clock, match_seconds);
    w.emit(out.back()["team_id"].get<std::string>(), '@', 0.5, 0.5);
  }
  return out;
}

void write_synthetic_events(std::ostream& out, const SyntheticConfig& cfg) {
  for (const auto& rec : synthetic_events(cfg)) out << rec.dump() << '\n';
}

}  // namespace possig
