#pragma once

#include <vector>

#include "similoc/pose.hpp"

namespace similoc {

// Ordered waypoint polyline with cumulative arclength. Consecutive
// duplicate points are dropped on construction.
struct PlannedPath {
  struct Waypoint {
    double easting = 0.0;
    double northing = 0.0;
  };

  std::vector<Waypoint> points;
  std::vector<double> arclength;  // same size; arclength[0] == 0

  static PlannedPath from_points(const std::vector<Waypoint>& pts);

  double length() const { return arclength.empty() ? 0.0 : arclength.back(); }

  // Position at arclength s (clamped to [0, length]), linear between
  // waypoints.
  Waypoint at(double s) const;

  // Tangent direction (unit vector) of the segment containing s.
  void tangent(double s, double& te, double& tn) const;
};

}  // namespace similoc
