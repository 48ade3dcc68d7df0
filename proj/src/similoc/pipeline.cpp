#include "similoc/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>

#include "similoc/errors.hpp"
#include "similoc/matcher.hpp"
#include "similoc/raster_io.hpp"

namespace similoc {
namespace fs = std::filesystem;

namespace {

std::string scan_path(const std::string& run_dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "scans/%06d.txt", frame);
  return run_dir + "/" + name;
}

std::string fmt(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace

void run_simulate(const SimulateOptions& opt) {
  fs::create_directories(opt.out_dir);
  fs::create_directories(opt.out_dir + "/scans");

  const SyntheticWorld world = generate_world(opt.world);
  const SyntheticWorld live = opt.shift.kind == AppearanceKind::none
                                  ? world
                                  : apply_appearance_shift(world, opt.shift, opt.world.seed);

  // The prior map in the run directory is always the unshifted satellite;
  // the live (shifted) world only colors the scans.
  save_raster(world.satellite, opt.out_dir + "/satellite.ppm");
  save_raster(world.road_mask, opt.out_dir + "/road_mask.pgm");
  save_path_csv(world.planned_path, opt.out_dir + "/path.csv");

  Trajectory gt;
  std::vector<OdomRecord> odometry;
  int frame = 0;
  generate_run(world, live.satellite, opt.run,
               [&](const ScanFrame& f) {
                 write_scan_file(f, scan_path(opt.out_dir, frame));
                 ++frame;
               },
               gt, odometry);
  save_trajectory_csv(gt, opt.out_dir + "/gt.csv");
  save_odometry_csv(odometry, opt.out_dir + "/odometry.csv");
}

void run_build_simimap(const SimimapOptions& opt) {
  const GeoRaster satellite = load_raster(opt.satellite_path);
  const PlannedPath path = load_path_csv(opt.path_csv);
  const GeoRaster simimap =
      build_global_simimap(satellite, path, opt.params,
                           [](const GeoRaster& img) { return embed_default(img); });
  save_raster(simimap, opt.out_path);
}

LocalizeResult run_localize(const LocalizeOptions& opt) {
  const GeoRaster global_map = load_raster(opt.map_path);
  if (opt.mode == MatchMode::similarity && global_map.channels != 1)
    throw std::invalid_argument("localize: similarity mode expects a single-channel map");
  if (opt.mode == MatchMode::rgb && global_map.channels != 3)
    throw std::invalid_argument("localize: rgb mode expects a color map");

  const std::vector<OdomRecord> odometry = load_odometry_csv(opt.run_dir + "/odometry.csv");

  Trajectory gt;
  bool have_gt = false;
  if (fs::exists(opt.run_dir + "/gt.csv")) {
    gt = load_trajectory_csv(opt.run_dir + "/gt.csv");
    have_gt = !gt.empty();
  }

  PlannedPath planned;
  bool have_path = false;
  if (opt.refine_interval > 0 && fs::exists(opt.run_dir + "/path.csv")) {
    planned = load_path_csv(opt.run_dir + "/path.csv");
    have_path = planned.points.size() >= 2;
  }

  if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);
  if (opt.dump_bev_every > 0 && !opt.dump_dir.empty()) fs::create_directories(opt.dump_dir);

  std::ofstream steps;
  std::ofstream snapshots;
  if (!opt.out_dir.empty()) {
    steps.open(opt.out_dir + "/steps.csv", std::ios::binary);
    if (!steps) throw IoError("cannot open for writing: " + opt.out_dir + "/steps.csv");
    steps << "t,odo_e,odo_n,odo_h,est_e,est_n,est_h,gt_e,gt_n,gt_h,neff,best_ncc,"
             "align_applied\n";
  }
  if (opt.dump_bev_every > 0 && !opt.dump_dir.empty()) {
    snapshots.open(opt.dump_dir + "/snapshots.csv", std::ios::binary);
    snapshots << "frame,t,gt_e,gt_n,gt_h\n";
  }

  LocalizeResult result;
  result.estimate.has_heading = true;
  result.dead_reckon.has_heading = true;

  PointAccumulator acc(opt.accumulator_window);
  PrototypeSet protos(kDefaultEmbedDim, opt.prototypes);
  std::unique_ptr<ParticleFilter> filter;

  // Odometry poses the BEV is anchored to, sampled for feature probes.
  std::deque<WorldPose> probe_trail;
  double trail_gap = 0.0;

  const auto t0 = std::chrono::steady_clock::now();
  int consecutive_degenerate = 0;

  for (int frame = 0;; ++frame) {
    if (opt.max_frames > 0 && frame >= opt.max_frames) break;
    const std::string spath = scan_path(opt.run_dir, frame);
    if (!fs::exists(spath)) break;
    ScanFrame scan;
    try {
      scan = read_scan_file(spath);
    } catch (const ParseError& e) {
      throw ParseError("frame " + std::to_string(frame) + ": " + e.what());
    }
    acc.push(scan);

    const WorldPose odo = scan.pose;
    if (probe_trail.empty()) {
      probe_trail.push_back(odo);
    } else {
      const WorldPose& last = probe_trail.back();
      trail_gap += std::hypot(odo.easting - last.easting, odo.northing - last.northing);
      if (trail_gap >= opt.traj_probe_spacing) {
        probe_trail.push_back(odo);
        trail_gap = 0.0;
        const double keep = opt.bev_px * opt.bev_res;  // generous window
        while (probe_trail.size() > std::size_t(keep / opt.traj_probe_spacing) + 4)
          probe_trail.pop_front();
      }
    }

    const GeoRaster bev = rasterize_bev(acc, odo, opt.bev_px, opt.bev_res);

    GeoRaster bev_match;  // what ncc sees
    if (opt.mode == MatchMode::similarity) {
      const FeatureMap fm = embed_default(bev);
      std::vector<WorldPose> probes(probe_trail.begin(), probe_trail.end());
      protos.update(sample_traversability_vectors(fm, probes));
      if (!protos.empty()) {
        bev_match = similarity_map(fm, protos);
      } else {
        bev_match = GeoRaster(opt.bev_px, opt.bev_px, 1, bev.georef);
        bev_match.orientation = bev.orientation;
      }
    } else {
      bev_match = bev;
    }

    if (!filter) {
      const WorldPose prior = opt.has_init_pose ? opt.init_pose : odo;
      filter = std::make_unique<ParticleFilter>(prior, opt.filter);
    }

    WorldPose est = odo;
    double neff = double(opt.filter.num_particles);
    double best_score = 0.0;
    bool align_applied = false;

    if (frame == 0) {
      est = filter->estimate_pose().pose;
    } else {
      const std::size_t oi = std::size_t(frame) - 1;
      if (oi >= odometry.size())
        throw ParseError("odometry.csv shorter than the scan sequence");
      const auto step = filter->step(odometry[oi].delta, bev_match, global_map);
      est = step.pose;
      neff = step.neff;
      best_score = step.best_score;
      consecutive_degenerate = step.degenerate ? consecutive_degenerate + 1 : 0;
      if (step.degenerate) ++result.degenerate_frames;
      if (consecutive_degenerate > opt.divergence_limit)
        throw DivergenceError("filter degenerate for more than " +
                              std::to_string(opt.divergence_limit) + " consecutive frames");

      if (have_path && opt.refine_interval > 0 && frame % opt.refine_interval == 0) {
        // Recent estimate tail with enough travel for registration.
        Trajectory tail;
        double travel = 0.0;
        const auto& pts = result.estimate.points;
        for (std::size_t i = pts.size(); i-- > 0;) {
          if (i + 1 < pts.size())
            travel += std::hypot(pts[i + 1].easting - pts[i].easting,
                                 pts[i + 1].northing - pts[i].northing);
          tail.points.push_back(pts[i]);
          if (travel > opt.refine.min_traj_span * 1.5) break;
        }
        std::reverse(tail.points.begin(), tail.points.end());
        tail.points.push_back({scan.timestamp, est.easting, est.northing, est.heading});
        const RefineResult rr = refine(est, tail, planned, opt.refine);
        if (rr.applied) {
          filter->apply_correction(est, rr.rotation, rr.de, rr.dn);
          est = rr.pose;
          align_applied = true;
          ++result.refines_applied;
        }
      }
    }

    result.estimate.points.push_back({scan.timestamp, est.easting, est.northing, est.heading});
    result.dead_reckon.points.push_back({scan.timestamp, odo.easting, odo.northing, odo.heading});

    if (steps.is_open()) {
      double ge = std::nan(""), gn = std::nan(""), gh = std::nan("");
      if (have_gt && std::size_t(frame) < gt.points.size()) {
        ge = gt.points[frame].easting;
        gn = gt.points[frame].northing;
        gh = gt.points[frame].heading;
      }
      steps << fmt(scan.timestamp) << ',' << fmt(odo.easting) << ',' << fmt(odo.northing)
            << ',' << fmt(odo.heading) << ',' << fmt(est.easting) << ',' << fmt(est.northing)
            << ',' << fmt(est.heading) << ',' << fmt(ge) << ',' << fmt(gn) << ',' << fmt(gh)
            << ',' << fmt(neff) << ',' << fmt(best_score) << ',' << (align_applied ? 1 : 0)
            << '\n';
    }

    if (opt.dump_bev_every > 0 && !opt.dump_dir.empty() &&
        frame % opt.dump_bev_every == 0) {
      char name[48];
      std::snprintf(name, sizeof(name), "/bev_%06d.pgm", frame);
      GeoRaster dump = bev_match;
      if (dump.channels == 3) {
        std::snprintf(name, sizeof(name), "/bev_%06d.ppm", frame);
      }
      save_raster(dump, opt.dump_dir + name);
      if (snapshots.is_open() && have_gt && std::size_t(frame) < gt.points.size())
        snapshots << frame << ',' << fmt(scan.timestamp) << ','
                  << fmt(gt.points[frame].easting) << ',' << fmt(gt.points[frame].northing)
                  << ',' << fmt(gt.points[frame].heading) << '\n';
    }
    ++result.frames;
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (result.frames == 0) throw DegenerateInput("localize: no scan frames in " + opt.run_dir);
  if (!opt.out_dir.empty()) {
    save_trajectory_csv(result.estimate, opt.out_dir + "/est.csv");
    save_trajectory_csv(result.dead_reckon, opt.out_dir + "/odom.csv");
  }
  return result;
}

EvalResult run_eval(const std::string& est_csv, const std::string& gt_csv) {
  const Trajectory est = load_trajectory_csv(est_csv);
  const Trajectory gt = load_trajectory_csv(gt_csv);
  const ErrorSeries series = error_series(est, gt);
  return EvalResult{series.ate, series.lpe, series.paired, series.dropped};
}

WorldSpec world_spec_from_config(const Config& cfg) {
  WorldSpec w;
  w.seed = cfg.get_u64("world.seed", w.seed);
  w.extent = cfg.get_double("world.extent", w.extent);
  w.resolution = cfg.get_double("world.resolution", w.resolution);
  w.margin = cfg.get_double("world.margin", w.margin);
  w.waypoint_count = cfg.get_int("world.waypoint_count", w.waypoint_count);
  w.waypoint_jitter = cfg.get_double("world.waypoint_jitter", w.waypoint_jitter);
  w.curvature_max = cfg.get_double("world.curvature_max", w.curvature_max);
  w.road_width = cfg.get_double("world.road_width", w.road_width);
  w.road_noise = cfg.get_double("world.road_noise", w.road_noise);
  w.terrain_noise = cfg.get_double("world.terrain_noise", w.terrain_noise);
  w.terrain_patch_noise = cfg.get_double("world.terrain_patch_noise", w.terrain_patch_noise);
  return w;
}

RunSpec run_spec_from_config(const Config& cfg) {
  RunSpec r;
  r.seed = cfg.get_u64("run.seed", r.seed);
  r.speed = cfg.get_double("run.speed", r.speed);
  r.frame_rate = cfg.get_double("run.frame_rate", r.frame_rate);
  r.laps = cfg.get_double("run.laps", r.laps);
  r.scan_range = cfg.get_double("run.scan_range", r.scan_range);
  r.points_per_scan = cfg.get_int("run.points_per_scan", r.points_per_scan);
  r.occlusion_sectors = cfg.get_int("run.occlusion_sectors", r.occlusion_sectors);
  r.occlusion_width = cfg.get_double("run.occlusion_width_deg",
                                     r.occlusion_width * 180.0 / kPi) * kPi / 180.0;
  r.bias_dx = cfg.get_double("run.bias_dx", r.bias_dx);
  r.bias_dy = cfg.get_double("run.bias_dy", r.bias_dy);
  r.bias_dtheta = cfg.get_double("run.bias_dtheta_deg",
                                 r.bias_dtheta * 180.0 / kPi) * kPi / 180.0;
  r.noise_x = cfg.get_double("run.noise_x", r.noise_x);
  r.noise_y = cfg.get_double("run.noise_y", r.noise_y);
  r.noise_theta = cfg.get_double("run.noise_theta_deg",
                                 r.noise_theta * 180.0 / kPi) * kPi / 180.0;
  return r;
}

FilterConfig filter_config_from_config(const Config& cfg) {
  FilterConfig f;
  f.num_particles = cfg.get_int("filter.num_particles", f.num_particles);
  f.init_radius = cfg.get_double("filter.init_radius", f.init_radius);
  f.init_heading_range = cfg.get_double("filter.init_heading_range_deg",
                                        f.init_heading_range * 180.0 / kPi) * kPi / 180.0;
  f.neff_threshold = cfg.get_double("filter.neff_threshold", f.neff_threshold);
  f.noise.sigma_x = cfg.get_double("filter.sigma_x", f.noise.sigma_x);
  f.noise.sigma_y = cfg.get_double("filter.sigma_y", f.noise.sigma_y);
  f.noise.sigma_theta = cfg.get_double("filter.sigma_theta_deg",
                                       f.noise.sigma_theta * 180.0 / kPi) * kPi / 180.0;
  f.seed = cfg.get_u64("filter.seed", f.seed);
  f.body_frame_deltas = cfg.get_bool("filter.body_frame_deltas", f.body_frame_deltas);
  return f;
}

LocalizeOptions localize_options_from_config(const Config& cfg) {
  LocalizeOptions o;
  o.filter = filter_config_from_config(cfg);
  o.prototypes.k_max = cfg.get_int("similarity.k_max", o.prototypes.k_max);
  o.prototypes.tau_new = cfg.get_double("similarity.tau_new", o.prototypes.tau_new);
  o.prototypes.eta = cfg.get_double("similarity.eta", o.prototypes.eta);
  o.accumulator_window = cfg.get_int("bev.window_frames", o.accumulator_window);
  o.bev_px = cfg.get_int("bev.size_px", o.bev_px);
  o.bev_res = cfg.get_double("bev.resolution", o.bev_res);
  o.traj_probe_spacing = cfg.get_double("similarity.probe_spacing", o.traj_probe_spacing);
  o.refine_interval = cfg.get_int("align.interval", o.refine_interval);
  o.refine.min_traj_span = cfg.get_double("align.min_span", o.refine.min_traj_span);
  o.refine.accept_threshold = cfg.get_double("align.accept_threshold",
                                             o.refine.accept_threshold);
  o.max_frames = cfg.get_int("localize.max_frames", o.max_frames);
  o.divergence_limit = cfg.get_int("localize.divergence_limit", o.divergence_limit);
  const std::string mode = cfg.get_string("localize.mode", "simi");
  if (mode == "rgb") o.mode = MatchMode::rgb;
  else if (mode != "simi")
    throw ParseError("localize.mode must be 'simi' or 'rgb'");
  return o;
}

}  // namespace similoc
