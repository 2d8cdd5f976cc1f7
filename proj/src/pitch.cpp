#include "possig/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"

namespace possig {

namespace {

constexpr double kTol = 1e-9;

// Box depth 16.5/105 and the wide channels outside the box.
constexpr double kBoxX = 0.842;
constexpr double kBoxYLow = 0.211;
constexpr double kBoxYHigh = 0.789;

double overlap_area(const ZoneRect& a, const ZoneRect& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  return w > 0.0 && h > 0.0 ? w * h : 0.0;
}

}  // namespace

PitchPartition::PitchPartition(std::string name, std::vector<ZoneRect> rects)
    : name_(std::move(name)), rects_(std::move(rects)) {
  if (rects_.empty()) throw DataError("partition '" + name_ + "' has no zones");
  double total = 0.0;
  for (std::size_t i = 0; i < rects_.size(); ++i) {
    const auto& r = rects_[i];
    if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max))
      throw DataError("partition '" + name_ + "': degenerate rectangle for zone " + std::to_string(r.zone));
    if (r.x_min < -kTol || r.y_min < -kTol || r.x_max > 1.0 + kTol || r.y_max > 1.0 + kTol)
      throw DataError("partition '" + name_ + "': rectangle outside the unit pitch");
    total += r.area();
    for (std::size_t j = 0; j < i; ++j) {
      if (overlap_area(r, rects_[j]) > kTol)
        throw DataError("partition '" + name_ + "': zones " + std::to_string(rects_[j].zone) + " and " +
                        std::to_string(r.zone) + " overlap");
    }
  }
  if (std::abs(total - 1.0) > kTol) throw DataError("partition '" + name_ + "' does not cover the pitch");

  std::set<int> ids;
  for (const auto& r : rects_) ids.insert(r.zone);
  zone_ids_.assign(ids.begin(), ids.end());
}

std::string PitchPartition::zone_name(int zone) const {
  for (const auto& r : rects_)
    if (r.zone == zone) return r.name;
  return {};
}

int PitchPartition::zone_of(double x, double y) const {
  x = std::clamp(x, 0.0, 1.0);
  y = std::clamp(y, 0.0, 1.0);
  for (auto it = rects_.rbegin(); it != rects_.rend(); ++it)
    if (it->contains(x, y)) return it->zone;
  // Coverage is validated to 1e-9; a point can only fall into a sliver gap.
  double best = INFINITY;
  int zone = rects_.front().zone;
  for (const auto& r : rects_) {
    const double dx = std::max({r.x_min - x, 0.0, x - r.x_max});
    const double dy = std::max({r.y_min - y, 0.0, y - r.y_max});
    if (dx + dy < best) {
      best = dx + dy;
      zone = r.zone;
    }
  }
  return zone;
}

nlohmann::json PitchPartition::to_json() const {
  nlohmann::json zones = nlohmann::json::array();
  for (const auto& r : rects_) {
    zones.push_back({{"zone", r.zone},
                     {"name", r.name},
                     {"x_min", r.x_min},
                     {"x_max", r.x_max},
                     {"y_min", r.y_min},
                     {"y_max", r.y_max}});
  }
  return {{"name", name_}, {"zones", zones}};
}

PitchPartition PitchPartition::from_json(const nlohmann::json& j) {
  try {
    const auto& list = j.is_array() ? j : j.at("zones");
    std::vector<ZoneRect> rects;
    for (const auto& z : list) {
      ZoneRect r;
      r.zone = z.at("zone").get<int>();
      r.name = z.value("name", "zone_" + std::to_string(r.zone));
      r.x_min = z.at("x_min").get<double>();
      r.x_max = z.at("x_max").get<double>();
      r.y_min = z.at("y_min").get<double>();
      r.y_max = z.at("y_max").get<double>();
      rects.push_back(std::move(r));
    }
    return PitchPartition(j.is_object() ? j.value("name", "custom") : "custom", std::move(rects));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid partition config: ") + e.what());
  }
}

PitchPartition PitchPartition::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition file '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("partition file '" + path + "': " + e.what());
  }
}

PitchPartition default_zones() {
  // Zone 8 (goal-mouth strip) is listed before the zone 7 pieces so the
  // edge x = 0.95 inside the box resolves to zone 7.
  return PitchPartition("default8", {
      {1, "own half", 0.0, 0.5, 0.0, 1.0},
      {2, "middle third left", 0.5, 0.75, 0.0, 0.5},
      {3, "middle third right", 0.5, 0.75, 0.5, 1.0},
      {4, "left wing", 0.75, 1.0, 0.0, kBoxYLow},
      {5, "zone 14", 0.75, kBoxX, kBoxYLow, kBoxYHigh},
      {6, "right wing", 0.75, 1.0, kBoxYHigh, 1.0},
      {8, "goal mouth", 0.95, 1.0, 0.368, 0.632},
      {7, "central box", kBoxX, 0.95, kBoxYLow, kBoxYHigh},
      {7, "central box", 0.95, 1.0, kBoxYLow, 0.368},
      {7, "central box", 0.95, 1.0, 0.632, kBoxYHigh},
  });
}

PitchPartition default_areas() {
  constexpr double third = 2.0 / 3.0;
  return PitchPartition("areas", {
      {0, "area_0", 0.0, third, 0.0, 1.0},
      {1, "area_1", third, kBoxX, 0.0, 1.0},
      {1, "area_1", kBoxX, 1.0, 0.0, kBoxYLow},
      {1, "area_1", kBoxX, 1.0, kBoxYHigh, 1.0},
      {2, "area_2", kBoxX, 1.0, kBoxYLow, kBoxYHigh},
  });
}

PitchPartition single_zone() { return PitchPartition("single", {{1, "pitch", 0.0, 1.0, 0.0, 1.0}}); }

std::size_t Grid::cell_of(double x, double y) const {
  auto bin = [](double v, std::size_t n) {
    const double c = std::clamp(v, 0.0, 1.0);
    return std::min(static_cast<std::size_t>(c * static_cast<double>(n)), n - 1);
  };
  return bin(y, rows) * cols + bin(x, cols);
}

double Grid::center_x(std::size_t cell) const {
  return (static_cast<double>(cell % cols) + 0.5) / static_cast<double>(cols);
}

double Grid::center_y(std::size_t cell) const {
  return (static_cast<double>(cell / cols) + 0.5) / static_cast<double>(rows);
}

}  // namespace possig
