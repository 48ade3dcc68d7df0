#pragma once

#include <vector>

#include "similoc/angles.hpp"
#include "similoc/planned_path.hpp"
#include "similoc/raster.hpp"
#include "similoc/trajectory.hpp"

namespace similoc {

struct AlignmentTransform {
  double rotation = 0.0;   // radians about the raster center, image coords
  int trans_col = 0;       // integer pixel translation
  int trans_row = 0;
  double overlap_score = 0.0;  // in [0, 1]
};

// 1-pixel-wide 8-connected polyline raster (Bresenham between consecutive
// points after world_to_pixel); segments outside the raster are clipped.
GeoRaster render_curve(const std::vector<PlannedPath::Waypoint>& points,
                       const GeoRef& georef, int size_px);

// Exhaustive rotation x integer-translation search maximizing
//   |lit(T(traj)) hits dilate1(lit(path))| / |lit(traj)|.
// Rotation is about pixel (size/2, size/2). Ties break by smallest
// |rotation|, then smallest translation norm, then scan order. Throws
// DegenerateInput when either raster has no lit pixels.
AlignmentTransform register_curves(const GeoRaster& traj_raster,
                                   const GeoRaster& path_raster,
                                   double rot_range, double rot_step,
                                   int trans_range, int trans_step);

struct RefineParams {
  double min_traj_span = 100.0;             // meters of travel required
  double raster_res = 0.2;                  // meters per pixel
  int raster_px = 1000;
  double rot_range = 5.0 * kPi / 180.0;
  double rot_step = 0.5 * kPi / 180.0;
  int trans_range = 10;                     // pixels
  int trans_step = 1;
  double accept_threshold = 0.7;
};

struct RefineResult {
  WorldPose pose;             // corrected (or unchanged) estimate
  bool applied = false;
  double overlap_score = 0.0;
  // World-frame correction actually applied (zero when rejected).
  double rotation = 0.0;
  double de = 0.0;
  double dn = 0.0;
};

// Renders the recent estimated trajectory and the planned path around the
// current estimate, registers them, and applies the recovered transform to
// the estimate when the overlap clears the acceptance threshold. Too-short
// trajectories are a no-op with applied=false.
RefineResult refine(const WorldPose& current_estimate, const Trajectory& recent_traj,
                    const PlannedPath& path, const RefineParams& params = {});

}  // namespace similoc
