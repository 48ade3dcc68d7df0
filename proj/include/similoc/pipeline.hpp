#pragma once

#include <string>

#include "similoc/config.hpp"
#include "similoc/evaluation.hpp"
#include "similoc/filter.hpp"
#include "similoc/path_align.hpp"
#include "similoc/sim_world.hpp"
#include "similoc/similarity.hpp"

namespace similoc {

// Run directory layout written by simulate and consumed by localize:
//   satellite.ppm/.geo   prior color map (always the unshifted world)
//   road_mask.pgm/.geo   synthetic ground truth road mask
//   path.csv             planned path waypoints
//   odometry.csv         t,dx,dy,dtheta world-frame deltas (frames 1..N-1)
//   gt.csv               ground-truth trajectory
//   scans/NNNNNN.txt     per-frame colored scans

struct SimulateOptions {
  WorldSpec world;
  RunSpec run;
  AppearanceShift shift;  // kind none: scans see the base satellite
  std::string out_dir;
};
void run_simulate(const SimulateOptions& opt);

struct SimimapOptions {
  std::string satellite_path;
  std::string path_csv;
  std::string out_path;  // single-channel raster (.pgm)
  SimimapParams params;
};
void run_build_simimap(const SimimapOptions& opt);

enum class MatchMode { similarity, rgb };

struct LocalizeOptions {
  std::string run_dir;
  std::string map_path;  // global similarity map (.pgm) or satellite (.ppm) for rgb mode
  std::string out_dir;
  MatchMode mode = MatchMode::similarity;

  FilterConfig filter;
  PrototypeParams prototypes;
  int accumulator_window = 100;  // frames
  int bev_px = 500;
  double bev_res = 0.2;
  double traj_probe_spacing = 1.0;  // meters between trajectory feature probes

  int refine_interval = 50;  // frames between path alignments; 0 disables
  RefineParams refine;

  bool has_init_pose = false;  // defaults to the first odometry pose
  WorldPose init_pose;

  int max_frames = 0;      // 0 = whole run
  int dump_bev_every = 0;  // frames; 0 = off
  std::string dump_dir;

  int divergence_limit = 100;  // consecutive degenerate frames tolerated
};

struct LocalizeResult {
  Trajectory estimate;
  Trajectory dead_reckon;
  int frames = 0;
  int degenerate_frames = 0;
  int refines_applied = 0;
  double wall_seconds = 0.0;
};
LocalizeResult run_localize(const LocalizeOptions& opt);

struct EvalResult {
  double ate = 0.0;
  double lpe = 0.0;
  int paired = 0;
  int dropped = 0;
};
EvalResult run_eval(const std::string& est_csv, const std::string& gt_csv);

void run_plot(const std::string& steps_csv, const std::string& out_svg);

// Config helpers shared by the CLI and tests.
WorldSpec world_spec_from_config(const Config& cfg);
RunSpec run_spec_from_config(const Config& cfg);
FilterConfig filter_config_from_config(const Config& cfg);
LocalizeOptions localize_options_from_config(const Config& cfg);

}  // namespace similoc
