#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "similoc/angles.hpp"
#include "similoc/bev.hpp"
#include "similoc/planned_path.hpp"
#include "similoc/raster.hpp"
#include "similoc/trajectory.hpp"
#include "similoc/trajectory_io.hpp"

namespace similoc {

struct WorldSpec {
  std::uint64_t seed = 42;
  double extent = 400.0;      // square world, meters
  double resolution = 0.2;    // meters per pixel; extent/resolution integral
  double margin = 45.0;       // road keep-out from the world edge

  // Road network: serpentine loop splined through jittered waypoints.
  int waypoint_count = 60;
  double waypoint_jitter = 3.0;   // meters
  double curvature_max = 0.08;    // 1/m
  double road_width = 4.0;        // meters

  // Texture (bright trail on dark scrub).
  float road_color[3] = {0.97f, 0.94f, 0.88f};
  float terrain_color[3] = {0.05f, 0.08f, 0.04f};
  double road_noise = 0.02;
  double terrain_noise = 0.04;
  double terrain_patch_noise = 0.05;  // low-frequency mottling amplitude

  // Roadside shrubs: discrete bright blobs flanking the trail; they give
  // the matcher longitudinal anchors the way real bushes and rocks do.
  double shrub_spacing = 9.0;   // meters of path per shrub (0 disables)
  double shrub_lateral_min = 3.5;
  double shrub_lateral_max = 14.0;
  double shrub_radius_min = 0.5;
  double shrub_radius_max = 1.4;
  float shrub_color[3] = {0.55f, 0.60f, 0.38f};
};

struct SyntheticWorld {
  WorldSpec spec;
  GeoRaster satellite;   // 3-channel color
  GeoRaster road_mask;   // 1-channel binary
  PlannedPath planned_path;
};

// Deterministic per seed. Throws DegenerateInput when the curvature bound
// cannot be met even with jitter attenuated away, std::invalid_argument on
// a non-integral extent/resolution ratio.
SyntheticWorld generate_world(const WorldSpec& spec);

enum class AppearanceKind { none, seasonal, night };

struct AppearanceShift {
  AppearanceKind kind = AppearanceKind::none;
  // Seasonal: per-channel affine recolor plus low-frequency off-road
  // blotches (grass flush analog).
  double gain[3] = {0.95, 0.8, 0.7};
  double offset[3] = {0.05, 0.01, 0.0};
  double blotch_coverage = 0.35;     // fraction of terrain
  double blotch_scale = 18.0;        // meters
  float blotch_color[3] = {0.20f, 0.45f, 0.10f};
  double blotch_alpha = 0.85;
  // Night: gray luminance with gain reduction.
  double night_gain = 0.55;
  // Extra per-pixel noise for either shift.
  double noise_amp = 0.03;

  static AppearanceShift seasonal();
  static AppearanceShift night();
};

// Recolors the satellite (and nothing else); road geometry, mask, and path
// are unchanged.
SyntheticWorld apply_appearance_shift(const SyntheticWorld& world,
                                      const AppearanceShift& shift, std::uint64_t seed);

struct RunSpec {
  std::uint64_t seed = 7;
  double speed = 5.0;        // m/s
  double frame_rate = 10.0;  // Hz
  double laps = 1.0;         // fraction of the loop driven
  double scan_range = 40.0;  // meters
  int points_per_scan = 20000;
  int occlusion_sectors = 1;
  double occlusion_width = 60.0 * kPi / 180.0;  // radians

  // Odometry drift: per-meter body-frame bias plus noise scaled by
  // sqrt(traveled meters).
  double bias_dx = 0.002;
  double bias_dy = 0.001;
  double bias_dtheta = 0.005 * kPi / 180.0;
  double noise_x = 0.01;
  double noise_y = 0.01;
  double noise_theta = 0.02 * kPi / 180.0;
};

// Drives the planned path at constant speed. Scan colors come from
// `live_satellite` (the appearance-shifted world for seasonal/night runs);
// scan headers carry the drifting odometry pose while geometry follows
// ground truth. Scans stream through `sink` in frame order.
void generate_run(const SyntheticWorld& world, const GeoRaster& live_satellite,
                  const RunSpec& run, const std::function<void(const ScanFrame&)>& sink,
                  Trajectory& gt_out, std::vector<OdomRecord>& odom_out);

// Convenience for tests: collects all scans in memory.
struct RunData {
  Trajectory gt;
  std::vector<OdomRecord> odometry;
  std::vector<ScanFrame> scans;
};
RunData generate_run(const SyntheticWorld& world, const GeoRaster& live_satellite,
                     const RunSpec& run);

}  // namespace similoc
