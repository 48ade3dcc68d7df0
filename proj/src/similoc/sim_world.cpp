#include "similoc/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "similoc/errors.hpp"
#include "similoc/rng.hpp"

namespace similoc {
namespace {

// Position-hashed noise; independent of traversal order.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double hash_unit(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  std::uint64_t h = mix64(std::uint64_t(ix) * 0x9e3779b97f4a7c15ull ^
                          std::uint64_t(iy) * 0xc2b2ae3d27d4eb4full ^ seed);
  return (h >> 11) * 0x1.0p-53;  // [0, 1)
}

// Bilinear value noise on a `scale`-meter lattice, in [0, 1).
double value_noise(double e, double n, double scale, std::uint64_t seed) {
  const double x = e / scale, y = n / scale;
  const double fx = std::floor(x), fy = std::floor(y);
  const std::int64_t ix = std::int64_t(fx), iy = std::int64_t(fy);
  const double tx = x - fx, ty = y - fy;
  const double v00 = hash_unit(ix, iy, seed), v10 = hash_unit(ix + 1, iy, seed);
  const double v01 = hash_unit(ix, iy + 1, seed), v11 = hash_unit(ix + 1, iy + 1, seed);
  return (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
}

// White noise in [-1, 1) keyed on the pixel index.
inline double pixel_noise(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  return hash_unit(ix, iy, seed) * 2.0 - 1.0;
}

// Closed Catmull-Rom through the waypoints, sampled densely. Consecutive
// duplicates (including first/last) are dropped first; zero-length segments
// would stall the spline into cusps.
std::vector<PlannedPath::Waypoint> spline_closed(
    const std::vector<PlannedPath::Waypoint>& wp_in, double sample_step) {
  std::vector<PlannedPath::Waypoint> wp;
  for (const auto& p : wp_in) {
    if (!wp.empty() && std::hypot(p.easting - wp.back().easting,
                                  p.northing - wp.back().northing) < 1e-9)
      continue;
    wp.push_back(p);
  }
  while (wp.size() > 1 && std::hypot(wp.front().easting - wp.back().easting,
                                     wp.front().northing - wp.back().northing) < 1e-9)
    wp.pop_back();
  const std::size_t n = wp.size();
  std::vector<PlannedPath::Waypoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p0 = wp[(i + n - 1) % n];
    const auto& p1 = wp[i];
    const auto& p2 = wp[(i + 1) % n];
    const auto& p3 = wp[(i + 2) % n];
    const double seg = std::hypot(p2.easting - p1.easting, p2.northing - p1.northing);
    const int steps = std::max(1, int(std::ceil(seg / sample_step)));
    for (int k = 0; k < steps; ++k) {
      const double t = double(k) / steps;
      const double t2 = t * t, t3 = t2 * t;
      const double b0 = -0.5 * t3 + t2 - 0.5 * t;
      const double b1 = 1.5 * t3 - 2.5 * t2 + 1.0;
      const double b2 = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
      const double b3 = 0.5 * t3 - 0.5 * t2;
      out.push_back({b0 * p0.easting + b1 * p1.easting + b2 * p2.easting + b3 * p3.easting,
                     b0 * p0.northing + b1 * p1.northing + b2 * p2.northing +
                         b3 * p3.northing});
    }
  }
  out.push_back(out.front());  // close the loop
  return out;
}

// Resample a closed polyline at an exact spacing.
std::vector<PlannedPath::Waypoint> resample_polyline(
    const std::vector<PlannedPath::Waypoint>& pts, double spacing) {
  PlannedPath dense = PlannedPath::from_points(pts);
  const double len = dense.length();
  const int n = std::max(4, int(std::floor(len / spacing)));
  std::vector<PlannedPath::Waypoint> out;
  out.reserve(n + 1);
  for (int i = 0; i < n; ++i) out.push_back(dense.at(len * i / n));
  out.push_back(out.front());
  return out;
}

// Discrete curvature via circumradius of consecutive triples.
double max_curvature(const std::vector<PlannedPath::Waypoint>& pts) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double ax = pts[i].easting - pts[i - 1].easting;
    const double ay = pts[i].northing - pts[i - 1].northing;
    const double bx = pts[i + 1].easting - pts[i].easting;
    const double by = pts[i + 1].northing - pts[i].northing;
    const double cross = ax * by - ay * bx;
    const double la = std::hypot(ax, ay), lb = std::hypot(bx, by);
    const double lc = std::hypot(ax + bx, ay + by);
    if (la * lb * lc == 0.0) continue;
    const double curvature = 2.0 * std::abs(cross) / (la * lb * lc);
    worst = std::max(worst, curvature);
  }
  return worst;
}

// Serpentine loop skeleton inside the margins: an even number of horizontal
// sweeps joined by half turns on alternating sides, closed by a return
// corridor with quarter-turn corners on the west side. All corners follow
// explicit arcs so the splined curvature stays near the arc radius.
std::vector<PlannedPath::Waypoint> serpentine_skeleton(const WorldSpec& spec) {
  const double lo = spec.margin, hi = spec.extent - spec.margin;
  const double usable = hi - lo;
  int rows = (int(usable / 50.0) / 2) * 2;
  rows = std::max(2, std::min(8, rows));
  const double row_gap = usable / rows;
  const double turn_r = row_gap / 2.0;
  const double x_left = lo + 2.0 * turn_r;  // return corridor runs at lo + turn_r
  const double x_right = hi - turn_r;
  const double y_bot = lo + turn_r;
  const double y_top = y_bot + (rows - 1) * row_gap;
  const double ret_x = x_left - turn_r;

  std::vector<PlannedPath::Waypoint> wp;
  double step = 30.0;
  if (spec.waypoint_count > 0) {
    const double rough_len = rows * (x_right - x_left) + kPi * turn_r * rows;
    step = std::max(12.0, rough_len / spec.waypoint_count);
  }

  for (int i = 0; i < rows; ++i) {
    const double y = y_bot + i * row_gap;
    const bool eastbound = (i % 2) == 0;  // last row is westbound (rows even)
    const double x0 = eastbound ? x_left : x_right;
    const double x1 = eastbound ? x_right : x_left;
    const int nseg = std::max(2, int(std::abs(x1 - x0) / step));
    for (int k = 0; k <= nseg; ++k)
      wp.push_back({x0 + (x1 - x0) * k / nseg, y});
    if (i + 1 < rows) {
      const double cx = eastbound ? x_right : x_left;
      const double sign = eastbound ? 1.0 : -1.0;
      for (int k = 1; k < 6; ++k) {
        const double a = kPi * k / 6.0;
        wp.push_back({cx + sign * turn_r * std::sin(a), y + turn_r * (1.0 - std::cos(a))});
      }
    }
  }

  // Top-left quarter turn: westbound at (x_left, y_top) into southbound at
  // (ret_x, y_top - turn_r); arc center (x_left, y_top - turn_r).
  for (int k = 1; k <= 3; ++k) {
    const double a = (kPi / 2.0) * k / 3.0;
    wp.push_back({x_left - turn_r * std::sin(a), y_top - turn_r * (1.0 - std::cos(a))});
  }
  // West corridor (absent when the quarter turns meet).
  const double col_top = y_top - turn_r, col_bot = y_bot + turn_r;
  if (col_top - col_bot > 1.0) {
    const int nret = std::max(1, int((col_top - col_bot) / step));
    for (int k = 1; k <= nret; ++k)
      wp.push_back({ret_x, col_top - (col_top - col_bot) * k / nret});
  }
  // Bottom-left quarter turn back onto the first row start (x_left, y_bot).
  for (int k = 1; k <= 2; ++k) {
    const double a = (kPi / 2.0) * k / 3.0;
    wp.push_back({ret_x + turn_r * (1.0 - std::cos(a)), col_bot - turn_r * std::sin(a)});
  }
  return wp;
}

}  // namespace

AppearanceShift AppearanceShift::seasonal() {
  AppearanceShift s;
  s.kind = AppearanceKind::seasonal;
  return s;
}

AppearanceShift AppearanceShift::night() {
  AppearanceShift s;
  s.kind = AppearanceKind::night;
  return s;
}

SyntheticWorld generate_world(const WorldSpec& spec) {
  const double cells = spec.extent / spec.resolution;
  const int dim = int(std::lround(cells));
  if (std::abs(cells - dim) > 1e-9 || dim <= 0)
    throw std::invalid_argument("generate_world: extent/resolution must be integral");
  if (spec.road_width < 2.0 * spec.resolution)
    throw std::invalid_argument("generate_world: road narrower than two pixels");

  Rng rng(Rng::derive_seed(spec.seed, "world"));

  // Skeleton + seeded jitter, splined, with jitter attenuated until the
  // curvature bound holds.
  const std::vector<PlannedPath::Waypoint> skeleton = serpentine_skeleton(spec);
  std::vector<PlannedPath::Waypoint> path_pts;
  double jitter = spec.waypoint_jitter;
  for (int attempt = 0;; ++attempt) {
    Rng jrng = rng.sub_stream("jitter", std::uint64_t(attempt));
    std::vector<PlannedPath::Waypoint> wp = skeleton;
    for (auto& p : wp) {
      p.easting += jrng.uniform(-jitter, jitter);
      p.northing += jrng.uniform(-jitter, jitter);
    }
    path_pts = resample_polyline(spline_closed(wp, 0.5), 1.0);
    if (max_curvature(path_pts) <= spec.curvature_max) break;
    if (attempt >= 6) {
      if (jitter == 0.0)
        throw DegenerateInput("generate_world: curvature bound infeasible for this layout");
      jitter = 0.0;
    } else {
      jitter *= 0.6;
    }
  }

  SyntheticWorld world;
  world.spec = spec;
  world.planned_path = PlannedPath::from_points(path_pts);

  const GeoRef georef{0.0, spec.extent - spec.resolution, spec.resolution};
  world.satellite = GeoRaster(dim, dim, 3, georef);
  world.road_mask = GeoRaster(dim, dim, 1, georef);

  // Distance-to-path field, stamped per segment over local bounding boxes.
  std::vector<float> dist(std::size_t(dim) * dim, std::numeric_limits<float>::infinity());
  const double res = spec.resolution;
  const double reach = spec.road_width / 2.0 + 3.0 * res;
  const auto& pts = world.planned_path.points;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double ax = pts[i - 1].easting, ay = pts[i - 1].northing;
    const double bx = pts[i].easting, by = pts[i].northing;
    double c0, r0, c1, r1;
    georef.world_to_pixel(std::min(ax, bx) - reach, std::max(ay, by) + reach, c0, r0);
    georef.world_to_pixel(std::max(ax, bx) + reach, std::min(ay, by) - reach, c1, r1);
    const int cs = std::max(0, int(std::floor(c0))), ce = std::min(dim - 1, int(std::ceil(c1)));
    const int rs = std::max(0, int(std::floor(r0))), re = std::min(dim - 1, int(std::ceil(r1)));
    const double ux = bx - ax, uy = by - ay;
    const double len_sq = ux * ux + uy * uy;
    for (int r = rs; r <= re; ++r) {
      for (int c = cs; c <= ce; ++c) {
        double e, n;
        georef.pixel_to_world(double(c), double(r), e, n);
        double t = len_sq > 0.0 ? ((e - ax) * ux + (n - ay) * uy) / len_sq : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = e - (ax + t * ux), dy = n - (ay + t * uy);
        const float d = float(std::sqrt(dx * dx + dy * dy));
        float& slot = dist[std::size_t(r) * dim + c];
        if (d < slot) slot = d;
      }
    }
  }

  // Roadside shrubs as soft color disks; kept off the trail itself. They
  // only touch the satellite texture, never the road mask.
  struct Shrub {
    double e, n, radius;
  };
  std::vector<Shrub> shrubs;
  if (spec.shrub_spacing > 0.0) {
    Rng srng = rng.sub_stream("shrubs");
    const double len = world.planned_path.length();
    for (double s = 0.0; s < len; s += spec.shrub_spacing) {
      const PlannedPath::Waypoint wp = world.planned_path.at(s + srng.uniform(0.0, spec.shrub_spacing));
      double te, tn;
      world.planned_path.tangent(s, te, tn);
      const double side = srng.uniform() < 0.5 ? -1.0 : 1.0;
      const double lat = side * srng.uniform(spec.shrub_lateral_min, spec.shrub_lateral_max);
      const double radius = srng.uniform(spec.shrub_radius_min, spec.shrub_radius_max);
      // left normal of the tangent
      shrubs.push_back({wp.easting - tn * lat, wp.northing + te * lat, radius});
    }
  }

  const float half_w = float(spec.road_width / 2.0);
  const float edge = float(res);  // soft color edge, one pixel
  float* mr = world.road_mask.plane(0);
  const std::uint64_t seed_hi = Rng::derive_seed(spec.seed, "texture_hi");
  const std::uint64_t seed_lo = Rng::derive_seed(spec.seed, "texture_lo");
  const std::uint64_t seed_lo2 = Rng::derive_seed(spec.seed, "texture_lo2");

  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const std::size_t i = std::size_t(r) * dim + c;
      const float d = dist[i];
      mr[i] = d <= half_w ? 1.0f : 0.0f;

      double e, n;
      georef.pixel_to_world(double(c), double(r), e, n);
      // Road coverage fades over one pixel past the nominal edge.
      double cover = (half_w + edge - d) / edge;
      cover = std::clamp(cover, 0.0, 1.0);

      const double mottle = 0.5 * (value_noise(e, n, 24.0, seed_lo) +
                                   value_noise(e, n, 7.0, seed_lo2));
      for (int ch = 0; ch < 3; ++ch) {
        const double road_v =
            spec.road_color[ch] + spec.road_noise * pixel_noise(c, r * 3 + ch, seed_hi);
        const double terr_v = spec.terrain_color[ch] +
                              spec.terrain_patch_noise * (mottle - 0.5) +
                              spec.terrain_noise * pixel_noise(c, r * 3 + ch, seed_hi + 1);
        double v = cover * road_v + (1.0 - cover) * terr_v;
        v = std::clamp(v, 0.0, 1.0);
        world.satellite.plane(ch)[i] = float(v);
      }
    }
  }

  const std::uint64_t seed_shrub = Rng::derive_seed(spec.seed, "shrub_tex");
  for (const Shrub& sh : shrubs) {
    double c0, r0, c1, r1;
    georef.world_to_pixel(sh.e - sh.radius - res, sh.n + sh.radius + res, c0, r0);
    georef.world_to_pixel(sh.e + sh.radius + res, sh.n - sh.radius - res, c1, r1);
    const int cs = std::max(0, int(std::floor(c0))), ce2 = std::min(dim - 1, int(std::ceil(c1)));
    const int rs2 = std::max(0, int(std::floor(r0))), re2 = std::min(dim - 1, int(std::ceil(r1)));
    for (int r = rs2; r <= re2; ++r) {
      for (int c = cs; c <= ce2; ++c) {
        const std::size_t i = std::size_t(r) * dim + c;
        if (dist[i] <= half_w + edge) continue;  // trail stays clear
        double e, n;
        georef.pixel_to_world(double(c), double(r), e, n);
        const double d = std::hypot(e - sh.e, n - sh.n);
        const double alpha = std::clamp((sh.radius - d) / res + 0.5, 0.0, 1.0);
        if (alpha <= 0.0) continue;
        for (int ch = 0; ch < 3; ++ch) {
          const double tone = spec.shrub_color[ch] +
                              0.06 * pixel_noise(c + dim, r * 3 + ch, seed_shrub);
          const double v = (1.0 - alpha) * world.satellite.plane(ch)[i] + alpha * tone;
          world.satellite.plane(ch)[i] = float(std::clamp(v, 0.0, 1.0));
        }
      }
    }
  }
  return world;
}

SyntheticWorld apply_appearance_shift(const SyntheticWorld& world,
                                      const AppearanceShift& shift, std::uint64_t seed) {
  SyntheticWorld out = world;
  if (shift.kind == AppearanceKind::none) return out;

  const int dim = world.satellite.width;
  const std::uint64_t noise_seed = Rng::derive_seed(seed, "shift_noise");
  const std::uint64_t blotch_seed = Rng::derive_seed(seed, "blotch");
  const float* road = world.road_mask.plane(0);

  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const std::size_t i = std::size_t(r) * dim + c;
      double e, n;
      world.satellite.georef.pixel_to_world(double(c), double(r), e, n);
      double px[3] = {world.satellite.plane(0)[i], world.satellite.plane(1)[i],
                      world.satellite.plane(2)[i]};

      if (shift.kind == AppearanceKind::night) {
        const double lum = (px[0] + px[1] + px[2]) / 3.0;
        const double v = shift.night_gain * lum +
                         shift.noise_amp * pixel_noise(c, r, noise_seed);
        px[0] = px[1] = px[2] = v;
      } else {
        for (int ch = 0; ch < 3; ++ch)
          px[ch] = shift.gain[ch] * px[ch] + shift.offset[ch] +
                   shift.noise_amp * pixel_noise(c, r * 3 + ch, noise_seed);
        // Low-frequency blotches on terrain only; the driven trail stays
        // exposed.
        if (road[i] == 0.0f && shift.blotch_coverage > 0.0) {
          const double field = 0.6 * value_noise(e, n, shift.blotch_scale, blotch_seed) +
                               0.4 * value_noise(e, n, shift.blotch_scale * 0.4,
                                                 blotch_seed + 1);
          if (field < shift.blotch_coverage) {
            const double a = shift.blotch_alpha;
            for (int ch = 0; ch < 3; ++ch)
              px[ch] = (1.0 - a) * px[ch] + a * (shift.blotch_color[ch] +
                       shift.noise_amp * pixel_noise(c + dim, r * 3 + ch, noise_seed));
          }
        }
      }
      for (int ch = 0; ch < 3; ++ch)
        out.satellite.plane(ch)[i] = float(std::clamp(px[ch], 0.0, 1.0));
    }
  }
  return out;
}

void generate_run(const SyntheticWorld& world, const GeoRaster& live_satellite,
                  const RunSpec& run, const std::function<void(const ScanFrame&)>& sink,
                  Trajectory& gt_out, std::vector<OdomRecord>& odom_out) {
  if (!(run.speed > 0.0) || !(run.frame_rate > 0.0) || !(run.scan_range > 0.0) ||
      run.points_per_scan < 0)
    throw std::invalid_argument("generate_run: invalid run spec");

  const PlannedPath& path = world.planned_path;
  const double total = path.length() * run.laps;
  const int frames = std::max(2, int(std::floor(total / run.speed * run.frame_rate)));
  const double ds = run.speed / run.frame_rate;

  Rng run_rng(Rng::derive_seed(run.seed, "run"));
  Rng odo_rng = run_rng.sub_stream("odometry");

  // Fixed occlusion sectors (body-frame bearing from forward). The first
  // sector faces rearward like a towed-load shadow; accumulation then
  // backfills it from frames that already drove through. Extra sectors are
  // scattered.
  std::vector<double> sector_centers;
  {
    Rng occ = run_rng.sub_stream("occlusion");
    for (int s = 0; s < run.occlusion_sectors; ++s) {
      if (s == 0)
        sector_centers.push_back(wrap_angle(kPi + occ.uniform(-0.26, 0.26)));
      else
        sector_centers.push_back(occ.uniform(-kPi, kPi));
    }
  }

  gt_out = Trajectory{};
  gt_out.has_heading = true;
  odom_out.clear();

  const std::uint64_t terrain_z_seed = Rng::derive_seed(world.spec.seed, "terrain_z");
  const auto ground_z = [&](double e, double n) {
    double col, row;
    world.road_mask.georef.world_to_pixel(e, n, col, row);
    const long ci = std::lround(col), ri = std::lround(row);
    if (ci >= 0 && ri >= 0 && ci < world.road_mask.width && ri < world.road_mask.height &&
        world.road_mask.plane(0)[std::size_t(ri) * world.road_mask.width + ci] != 0.0f)
      return 0.0;
    return 0.25 + 0.4 * value_noise(e, n, 6.0, terrain_z_seed);
  };

  const auto pose_at = [&](double s) {
    const double sm = std::fmod(s, path.length());
    const PlannedPath::Waypoint p = path.at(sm);
    double te, tn;
    path.tangent(sm, te, tn);
    return WorldPose(p.easting, p.northing, std::atan2(-te, tn));
  };

  WorldPose odom_pose = pose_at(0.0);
  WorldPose prev_gt = odom_pose;

  for (int f = 0; f < frames; ++f) {
    const double t = f / run.frame_rate;
    const WorldPose gt = pose_at(f * ds);
    gt_out.points.push_back({t, gt.easting, gt.northing, gt.heading});

    if (f > 0) {
      // True body-frame delta (midpoint heading), then drift and noise.
      const double dtheta = wrap_angle(gt.heading - prev_gt.heading);
      const double mid = prev_gt.heading + 0.5 * dtheta;
      const double dwe = gt.easting - prev_gt.easting;
      const double dwn = gt.northing - prev_gt.northing;
      double bx, by;
      rotate_offset(-mid, dwe, dwn, bx, by);
      const double step_len = std::hypot(dwe, dwn);
      const double sq = std::sqrt(step_len);

      const double obx = bx + run.bias_dx * step_len + odo_rng.gaussian() * run.noise_x * sq;
      const double oby = by + run.bias_dy * step_len + odo_rng.gaussian() * run.noise_y * sq;
      const double odt = dtheta + run.bias_dtheta * step_len +
                         odo_rng.gaussian() * run.noise_theta * sq;

      const double omid = odom_pose.heading + 0.5 * odt;
      double owe, own;
      rotate_offset(omid, obx, oby, owe, own);
      const WorldPose next(odom_pose.easting + owe, odom_pose.northing + own,
                           odom_pose.heading + odt);
      odom_out.push_back({t, MotionDelta{next.easting - odom_pose.easting,
                                         next.northing - odom_pose.northing,
                                         wrap_angle(next.heading - odom_pose.heading)}});
      odom_pose = next;
      prev_gt = gt;
    }

    // Scan synthesis: uniform-in-area ground samples around the true pose,
    // colored from the live satellite, occlusion sectors dropped.
    ScanFrame frame;
    frame.timestamp = t;
    frame.pose = odom_pose;
    frame.points.reserve(std::size_t(run.points_per_scan));
    Rng scan_rng = run_rng.sub_stream("scan", std::uint64_t(f));
    for (int i = 0; i < run.points_per_scan; ++i) {
      const double bearing = scan_rng.uniform(-kPi, kPi);
      const double rho = run.scan_range * std::sqrt(scan_rng.uniform());
      bool occluded = false;
      for (double c : sector_centers)
        if (std::abs(wrap_angle(bearing - c)) <= run.occlusion_width / 2.0) {
          occluded = true;
          break;
        }
      if (occluded) continue;
      // Body frame: y forward, x right.
      const double sx = rho * std::sin(bearing);
      const double sy = rho * std::cos(bearing);
      double we, wn;
      rotate_offset(gt.heading, sx, sy, we, wn);
      we += gt.easting;
      wn += gt.northing;

      double col, row;
      live_satellite.georef.world_to_pixel(we, wn, col, row);
      float rgb[3] = {0, 0, 0};
      bilinear_sample(live_satellite, col, row, rgb);

      ColoredPoint pt;
      pt.x = float(sx);
      pt.y = float(sy);
      pt.z = float(ground_z(we, wn));
      pt.r = rgb[0];
      pt.g = rgb[1];
      pt.b = rgb[2];
      frame.points.push_back(pt);
    }
    sink(frame);
  }
}

RunData generate_run(const SyntheticWorld& world, const GeoRaster& live_satellite,
                     const RunSpec& run) {
  RunData data;
  generate_run(world, live_satellite, run,
               [&](const ScanFrame& f) { data.scans.push_back(f); }, data.gt, data.odometry);
  return data;
}

}  // namespace similoc
