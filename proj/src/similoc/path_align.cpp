#include "similoc/path_align.hpp"

#include <algorithm>
#include <cmath>

#include "similoc/errors.hpp"

namespace similoc {
namespace {

// Liang-Barsky clip of a segment to [lo, hi]^2; false when fully outside.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo, double hi) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = x1 - x0, dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - lo, hi - x0, y0 - lo, hi - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        if (r > t1) return false;
        if (r > t0) t0 = r;
      } else {
        if (r < t0) return false;
        if (r < t1) t1 = r;
      }
    }
  }
  const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
  const double nx1 = x0 + t1 * dx, ny1 = y0 + t1 * dy;
  x0 = nx0; y0 = ny0; x1 = nx1; y1 = ny1;
  return true;
}

void draw_segment(GeoRaster& raster, double c0, double r0, double c1, double r1) {
  const int size = raster.width;
  if (!clip_segment(c0, r0, c1, r1, -0.49, size - 1 + 0.49)) return;
  int x0 = int(std::lround(c0)), y0 = int(std::lround(r0));
  int x1 = int(std::lround(c1)), y1 = int(std::lround(r1));
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  float* v = raster.plane(0);
  while (true) {
    if (x0 >= 0 && y0 >= 0 && x0 < size && y0 < size)
      v[std::size_t(y0) * size + x0] = 1.0f;
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

}  // namespace

GeoRaster render_curve(const std::vector<PlannedPath::Waypoint>& points,
                       const GeoRef& georef, int size_px) {
  if (points.size() < 2)
    throw std::invalid_argument("render_curve: at least two points required");
  GeoRaster out(size_px, size_px, 1, georef);
  for (std::size_t i = 1; i < points.size(); ++i) {
    double c0, r0, c1, r1;
    georef.world_to_pixel(points[i - 1].easting, points[i - 1].northing, c0, r0);
    georef.world_to_pixel(points[i].easting, points[i].northing, c1, r1);
    draw_segment(out, c0, r0, c1, r1);
  }
  return out;
}

AlignmentTransform register_curves(const GeoRaster& traj_raster,
                                   const GeoRaster& path_raster,
                                   double rot_range, double rot_step,
                                   int trans_range, int trans_step) {
  if (traj_raster.width != path_raster.width || traj_raster.height != path_raster.height)
    throw std::invalid_argument("register_curves: raster sizes differ");
  const int w = traj_raster.width, h = traj_raster.height;

  // Trajectory lit pixels.
  std::vector<std::pair<float, float>> lit;
  {
    const float* v = traj_raster.plane(0);
    const float cx = float(w / 2), cy = float(h / 2);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (v[std::size_t(r) * w + c] != 0.0f) lit.emplace_back(c - cx, r - cy);
  }
  if (lit.empty()) throw DegenerateInput("register_curves: empty trajectory raster");

  // 1-px dilated path mask absorbs rasterization aliasing.
  std::vector<std::uint8_t> dilated(std::size_t(w) * h, 0);
  {
    const float* v = path_raster.plane(0);
    bool any = false;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (v[std::size_t(r) * w + c] == 0.0f) continue;
        any = true;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr >= 0 && cc >= 0 && rr < h && cc < w)
              dilated[std::size_t(rr) * w + cc] = 1;
          }
      }
    if (!any) throw DegenerateInput("register_curves: empty path raster");
  }

  const int rot_steps = rot_step > 0.0 ? int(std::floor(rot_range / rot_step + 1e-9)) : 0;
  const int cx = w / 2, cy = h / 2;

  AlignmentTransform best;
  double best_rot_abs = 0.0;
  long best_trans_sq = 0;
  long best_index = -1;
  std::vector<int> rc(lit.size()), rr(lit.size());

  long index = 0;
  for (int ri = -rot_steps; ri <= rot_steps; ++ri) {
    const double rot = ri * rot_step;
    const float ct = float(std::cos(rot)), st = float(std::sin(rot));
    for (std::size_t i = 0; i < lit.size(); ++i) {
      const float x = lit[i].first, y = lit[i].second;
      rc[i] = int(std::lround(ct * x - st * y)) + cx;
      rr[i] = int(std::lround(st * x + ct * y)) + cy;
    }
    for (int tr = -trans_range; tr <= trans_range; tr += trans_step) {
      for (int tc = -trans_range; tc <= trans_range; tc += trans_step, ++index) {
        long hits = 0;
        for (std::size_t i = 0; i < lit.size(); ++i) {
          const int c = rc[i] + tc, r = rr[i] + tr;
          if (c >= 0 && r >= 0 && c < w && r < h && dilated[std::size_t(r) * w + c]) ++hits;
        }
        const double score = double(hits) / double(lit.size());
        const double rot_abs = std::abs(rot);
        const long trans_sq = long(tc) * tc + long(tr) * tr;
        bool take = false;
        if (score > best.overlap_score) take = true;
        else if (score == best.overlap_score && best_index >= 0) {
          if (rot_abs < best_rot_abs) take = true;
          else if (rot_abs == best_rot_abs && trans_sq < best_trans_sq) take = true;
        }
        if (take || best_index < 0) {
          best = AlignmentTransform{rot, tc, tr, score};
          best_rot_abs = rot_abs;
          best_trans_sq = trans_sq;
          best_index = index;
        }
      }
    }
  }
  return best;
}

RefineResult refine(const WorldPose& current_estimate, const Trajectory& recent_traj,
                    const PlannedPath& path, const RefineParams& params) {
  RefineResult out;
  out.pose = current_estimate;
  if (recent_traj.size() < 2 || recent_traj.travel_length() < params.min_traj_span)
    return out;
  if (path.points.size() < 2) return out;

  const GeoRef georef = GeoRef::centered(current_estimate.easting, current_estimate.northing,
                                         params.raster_res, params.raster_px, params.raster_px);
  std::vector<PlannedPath::Waypoint> traj_pts;
  traj_pts.reserve(recent_traj.size());
  for (const auto& p : recent_traj.points)
    traj_pts.push_back({p.easting, p.northing});

  const GeoRaster traj_raster = render_curve(traj_pts, georef, params.raster_px);
  const GeoRaster path_raster = render_curve(path.points, georef, params.raster_px);

  AlignmentTransform t;
  try {
    t = register_curves(traj_raster, path_raster, params.rot_range, params.rot_step,
                        params.trans_range, params.trans_step);
  } catch (const DegenerateInput&) {
    return out;  // nothing rendered in range
  }
  out.overlap_score = t.overlap_score;
  if (t.overlap_score < params.accept_threshold) return out;

  // Image-frame transform to world: rows grow southward, so an image
  // rotation by a is a world rotation by -a; pivot is the raster center,
  // i.e. the current estimate.
  out.rotation = -t.rotation;
  out.de = t.trans_col * params.raster_res;
  out.dn = -t.trans_row * params.raster_res;
  out.applied = true;
  out.pose = WorldPose(current_estimate.easting + out.de, current_estimate.northing + out.dn,
                       current_estimate.heading + out.rotation);
  return out;
}

}  // namespace similoc
