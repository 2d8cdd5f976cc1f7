#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace possig {

/// Closed axis-aligned rectangle on the unit pitch tagged with a zone id.
/// Several rectangles may share one zone id (non-rectangular zones).
struct ZoneRect {
  int zone = 0;
  std::string name;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Named zones covering [0,1]^2 without overlap.
class PitchPartition {
 public:
  PitchPartition() = default;
  /// Validates coverage and overlap to 1e-9; throws DataError otherwise.
  PitchPartition(std::string name, std::vector<ZoneRect> rects);

  const std::string& name() const { return name_; }
  const std::vector<ZoneRect>& rects() const { return rects_; }
  /// Distinct zone ids in ascending order.
  const std::vector<int>& zone_ids() const { return zone_ids_; }
  std::string zone_name(int zone) const;

  /// Zone id of the containing rectangle. A point on a shared edge belongs
  /// to the rectangle listed last. Inputs are clamped to [0,1].
  int zone_of(double x, double y) const;

  nlohmann::json to_json() const;
  static PitchPartition from_json(const nlohmann::json& j);
  static PitchPartition load(const std::string& path);

 private:
  std::string name_;
  std::vector<ZoneRect> rects_;
  std::vector<int> zone_ids_;
};

/// Eight tactical zones; zone 7 is the central penalty box.
PitchPartition default_zones();

/// Area ladder for zone values: 0 = rest of pitch, 1 = attacking third
/// outside the box, 2 = attacking penalty box.
PitchPartition default_areas();

/// One zone covering the whole pitch.
PitchPartition single_zone();

/// Rows x cols grid used by the expected-threat model: cols along x (pitch
/// length), rows along y. Cell index = row * cols + col.
struct Grid {
  std::size_t rows = 12;
  std::size_t cols = 16;

  std::size_t cells() const { return rows * cols; }
  std::size_t cell_of(double x, double y) const;
  double center_x(std::size_t cell) const;
  double center_y(std::size_t cell) const;
};

}  // namespace possig
