#pragma once

#include "similoc/angles.hpp"

namespace similoc {

// Planar pose in a UTM-like metric frame. Heading is a CCW rotation angle
// normalized to (-pi, pi]; heading 0 faces map-up (north), so a raster
// oriented by heading 0 is axis-aligned with a north-up map.
struct WorldPose {
  double easting = 0.0;
  double northing = 0.0;
  double heading = 0.0;

  WorldPose() = default;
  WorldPose(double e, double n, double h) : easting(e), northing(n), heading(wrap_angle(h)) {}

  // Unit forward vector (direction the vehicle faces / raster-up).
  double forward_east() const { return -std::sin(heading); }
  double forward_north() const { return std::cos(heading); }
};

// CCW rotation of a local offset by `heading`, east-north components.
inline void rotate_offset(double heading, double x, double y, double& out_x, double& out_y) {
  const double c = std::cos(heading), s = std::sin(heading);
  out_x = c * x - s * y;
  out_y = s * x + c * y;
}

}  // namespace similoc
