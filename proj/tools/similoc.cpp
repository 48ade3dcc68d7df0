// similoc - cross-view localization pipeline driver.
//
// Subcommands: simulate, build-simimap, localize, eval, match, plot.
// Exit codes: 0 success, 2 bad arguments, 3 input parse failure,
// 4 runtime divergence.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "similoc/angles.hpp"
#include "similoc/errors.hpp"
#include "similoc/matcher.hpp"
#include "similoc/pipeline.hpp"
#include "similoc/raster_io.hpp"

using namespace similoc;

namespace {

Config load_config_if(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::load(path);
}

int run(int argc, char** argv) {
  CLI::App app{"cross-view localization in road similarity space"};
  app.require_subcommand(1);

  std::string config_path;

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic world and run directory");
  std::string sim_out, sim_appearance = "none";
  sim->add_option("--out", sim_out, "output run directory")->required();
  sim->add_option("--config", config_path, "key = value config file");
  sim->add_option("--appearance", sim_appearance, "none|seasonal|night (scan colors)");

  // build-simimap
  auto* bsm = app.add_subcommand("build-simimap", "precompute the global road similarity map");
  std::string bsm_sat, bsm_path, bsm_out;
  bsm->add_option("--satellite", bsm_sat, "satellite PPM")->required();
  bsm->add_option("--path", bsm_path, "planned path CSV")->required();
  bsm->add_option("--out", bsm_out, "output similarity PGM")->required();
  bsm->add_option("--config", config_path, "key = value config file");

  // localize
  auto* loc = app.add_subcommand("localize", "run the closed localization loop");
  std::string loc_run, loc_map, loc_out, loc_mode, loc_dump_dir;
  int loc_max_frames = -1, loc_dump_every = -1;
  loc->add_option("--run", loc_run, "run directory")->required();
  loc->add_option("--map", loc_map, "global similarity map (or satellite PPM in rgb mode)")
      ->required();
  loc->add_option("--out", loc_out, "output directory")->required();
  loc->add_option("--mode", loc_mode, "simi|rgb");
  loc->add_option("--config", config_path, "key = value config file");
  loc->add_option("--max-frames", loc_max_frames, "process at most N frames");
  loc->add_option("--dump-bev-every", loc_dump_every, "dump the matched BEV every N frames");
  loc->add_option("--dump-dir", loc_dump_dir, "directory for BEV dumps");

  // eval
  auto* ev = app.add_subcommand("eval", "trajectory error metrics");
  std::string ev_est, ev_gt;
  ev->add_option("--est", ev_est, "estimated trajectory CSV")->required();
  ev->add_option("--gt", ev_gt, "ground-truth trajectory CSV")->required();

  // match
  auto* mt = app.add_subcommand("match", "single-shot coarse scan match (debug)");
  std::string mt_bev, mt_map;
  double mt_e = 0, mt_n = 0, mt_h_deg = 0, mt_radius = 50.0, mt_step = 0.5;
  double mt_heading_range = 2.0, mt_heading_step = 0.5;
  mt->add_option("--bev", mt_bev, "BEV similarity PGM")->required();
  mt->add_option("--map", mt_map, "global similarity PGM")->required();
  mt->add_option("--center-e", mt_e, "search center easting")->required();
  mt->add_option("--center-n", mt_n, "search center northing")->required();
  mt->add_option("--center-h-deg", mt_h_deg, "search center heading (degrees)");
  mt->add_option("--radius", mt_radius, "search radius, meters");
  mt->add_option("--step", mt_step, "grid step, meters");
  mt->add_option("--heading-range-deg", mt_heading_range, "heading sweep half-range");
  mt->add_option("--heading-step-deg", mt_heading_step, "heading sweep step");

  // plot
  auto* pl = app.add_subcommand("plot", "emit an SVG trajectory comparison");
  std::string pl_steps, pl_out;
  pl->add_option("--steps", pl_steps, "steps.csv from localize")->required();
  pl->add_option("--out", pl_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    const Config cfg = load_config_if(config_path);
    SimulateOptions opt;
    opt.world = world_spec_from_config(cfg);
    opt.run = run_spec_from_config(cfg);
    opt.out_dir = sim_out;
    if (sim_appearance == "seasonal") opt.shift = AppearanceShift::seasonal();
    else if (sim_appearance == "night") opt.shift = AppearanceShift::night();
    else if (sim_appearance != "none")
      throw CLI::ValidationError("--appearance must be none, seasonal, or night");
    run_simulate(opt);
    std::printf("world seed %llu, run seed %llu -> %s\n",
                (unsigned long long)opt.world.seed, (unsigned long long)opt.run.seed,
                sim_out.c_str());
    return 0;
  }

  if (bsm->parsed()) {
    const Config cfg = load_config_if(config_path);
    SimimapOptions opt;
    opt.satellite_path = bsm_sat;
    opt.path_csv = bsm_path;
    opt.out_path = bsm_out;
    opt.params.sample_interval = cfg.get_double("simimap.interval", opt.params.sample_interval);
    opt.params.patch_px = cfg.get_int("simimap.patch_px", opt.params.patch_px);
    opt.params.prototypes.k_max = cfg.get_int("similarity.k_max", opt.params.prototypes.k_max);
    opt.params.prototypes.tau_new =
        cfg.get_double("similarity.tau_new", opt.params.prototypes.tau_new);
    opt.params.prototypes.eta = cfg.get_double("similarity.eta", opt.params.prototypes.eta);
    run_build_simimap(opt);
    std::printf("similarity map -> %s\n", bsm_out.c_str());
    return 0;
  }

  if (loc->parsed()) {
    const Config cfg = load_config_if(config_path);
    LocalizeOptions opt = localize_options_from_config(cfg);
    opt.run_dir = loc_run;
    opt.map_path = loc_map;
    opt.out_dir = loc_out;
    if (!loc_mode.empty()) {
      if (loc_mode == "rgb") opt.mode = MatchMode::rgb;
      else if (loc_mode == "simi") opt.mode = MatchMode::similarity;
      else throw CLI::ValidationError("--mode must be simi or rgb");
    }
    if (loc_max_frames >= 0) opt.max_frames = loc_max_frames;
    if (loc_dump_every >= 0) opt.dump_bev_every = loc_dump_every;
    if (!loc_dump_dir.empty()) opt.dump_dir = loc_dump_dir;
    const LocalizeResult res = run_localize(opt);
    std::printf("%d frames in %.1f s (%.1f fps), %d degenerate, %d alignments\n",
                res.frames, res.wall_seconds, res.frames / res.wall_seconds,
                res.degenerate_frames, res.refines_applied);
    return 0;
  }

  if (ev->parsed()) {
    const EvalResult r = run_eval(ev_est, ev_gt);
    std::printf("ATE=%.6f LPE=%.6f paired=%d dropped=%d\n", r.ate, r.lpe, r.paired,
                r.dropped);
    return 0;
  }

  if (mt->parsed()) {
    const GeoRaster bev = load_raster(mt_bev);
    const GeoRaster map = load_raster(mt_map);
    std::vector<double> offsets;
    for (double d = -mt_heading_range; d <= mt_heading_range + 1e-9; d += mt_heading_step)
      offsets.push_back(deg_to_rad(d));
    const WorldPose center(mt_e, mt_n, deg_to_rad(mt_h_deg));
    const ScanMatchResult r = scan_match(bev, map, center, mt_radius, mt_step, offsets);
    std::printf("pose %.3f %.3f %.4f deg, score %.6f, second %.6f\n", r.pose.easting,
                r.pose.northing, rad_to_deg(r.pose.heading), r.score.value,
                r.second_best.value);
    return 0;
  }

  if (pl->parsed()) {
    run_plot(pl_steps, pl_out);
    std::printf("plot -> %s\n", pl_out.c_str());
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const DegenerateInput& e) {
    std::fprintf(stderr, "degenerate input: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid arguments: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
