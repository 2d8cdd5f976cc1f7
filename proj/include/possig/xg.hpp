#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace possig {

inline constexpr double kPitchLength = 105.0;
inline constexpr double kPitchWidth = 68.0;
inline constexpr double kGoalWidth = 7.32;

struct ShotGeometry {
  double distance = 0.0;  // metres to the goal centre
  double angle = 0.0;     // radians subtended by the posts
};

/// Geometry of a shot from unit-pitch coordinates (attacking towards x = 1).
ShotGeometry shot_geometry(double x, double y);

/// Logistic expected-goals model on (intercept, distance, angle).
struct XgModel {
  std::array<double, 3> gamma{};

  double logit(double x, double y) const;
  double prob(double x, double y) const;

  nlohmann::json to_json() const;
  static XgModel from_json(const nlohmann::json& j);
};

struct Shot {
  double x = 0.0;
  double y = 0.0;
  bool goal = false;
};

struct XgFit {
  XgModel model;
  std::array<double, 3> std_errors{};
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  double log_likelihood = 0.0;
  bool ridge = false;
  std::string warning;
};

inline constexpr std::size_t kMinShots = 50;

/// Maximum-likelihood fit by damped Newton steps. Falls back to a 1e-6
/// ridge penalty (with a warning) when the data are separable.
XgFit fit_xg(std::span<const Shot> shots);

}  // namespace possig
