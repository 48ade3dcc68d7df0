#pragma once

#include "similoc/pose.hpp"

namespace similoc {

// Geo-reference of a north-up raster: world coordinates of the center of
// pixel (col 0, row 0) and the ground resolution. Rows grow southward.
struct GeoRef {
  double origin_easting = 0.0;
  double origin_northing = 0.0;
  double resolution = 1.0;  // meters per pixel, > 0

  bool valid() const { return resolution > 0.0; }

  void world_to_pixel(double e, double n, double& col, double& row) const {
    col = (e - origin_easting) / resolution;
    row = (origin_northing - n) / resolution;
  }
  void pixel_to_world(double col, double row, double& e, double& n) const {
    e = origin_easting + col * resolution;
    n = origin_northing - row * resolution;
  }

  // GeoRef whose pixel (0,0) center sits at the given world point.
  static GeoRef at(double origin_e, double origin_n, double res) {
    return GeoRef{origin_e, origin_n, res};
  }
  // GeoRef for a w x h raster anchoring pixel (w/2, h/2) at the given world
  // point (the center-pixel convention used by BEV rasters and patches).
  static GeoRef centered(double center_e, double center_n, double res, int w, int h) {
    return GeoRef{center_e - double(w / 2) * res, center_n + double(h / 2) * res, res};
  }
};

}  // namespace similoc
