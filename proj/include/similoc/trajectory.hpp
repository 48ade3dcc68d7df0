#pragma once

#include <vector>

namespace similoc {

// Time-ordered pose sequence; heading column is optional.
struct Trajectory {
  struct Point {
    double t = 0.0;
    double easting = 0.0;
    double northing = 0.0;
    double heading = 0.0;
  };

  std::vector<Point> points;
  bool has_heading = false;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  // Total travel distance along the polyline.
  double travel_length() const;
};

}  // namespace similoc
