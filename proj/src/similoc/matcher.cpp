#include "similoc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "similoc/angles.hpp"
#include "similoc/errors.hpp"
#include "similoc/kernels/kernels.hpp"

namespace similoc {
namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Candidate ordering: higher score first, then closer to grid center, then
// smaller heading deviation, then scan order.
struct Candidate {
  double score = -1.0;
  double dist_sq = 0.0;
  double abs_hdg = 0.0;
  long index = 0;
  int i = 0, j = 0, k = 0;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.dist_sq != b.dist_sq) return a.dist_sq < b.dist_sq;
  if (a.abs_hdg != b.abs_hdg) return a.abs_hdg < b.abs_hdg;
  return a.index < b.index;
}

}  // namespace

double ncc_value(double gs, double gg, double ss) {
  if (gg <= 0.0 || ss <= 0.0) return 0.0;
  return clamp01(gs / std::sqrt(gg * ss));
}

MatchScore ncc(const GeoRaster& g, const GeoRaster& s) {
  if (g.width != s.width || g.height != s.height || g.channels != s.channels)
    throw std::invalid_argument("ncc: raster shapes differ");
  double gs = 0.0, gg = 0.0, ss = 0.0;
  kernels::active().ncc_sums(g.values.data(), s.values.data(), g.values.size(), gs, gg, ss);
  return MatchScore{ncc_value(gs, gg, ss)};
}

void patch_ncc_sums(const GeoRaster& map, const GeoRaster& g, const WorldPose& pose,
                    double& gs, double& ss) {
  const double res = map.georef.resolution;
  const double ct = std::cos(pose.heading), st = std::sin(pose.heading);
  const int cc = g.width / 2, cr = g.height / 2;
  const auto& k = kernels::active();
  for (int pr = 0; pr < g.height; ++pr) {
    const double up = double(cr - pr);
    const double e0 = pose.easting + res * (double(-cc) * ct - up * st);
    const double n0 = pose.northing + res * (double(-cc) * st + up * ct);
    double c0, r0;
    map.georef.world_to_pixel(e0, n0, c0, r0);
    for (int ch = 0; ch < map.channels; ++ch)
      k.bilinear_row_ncc(map.plane(ch), map.width, map.height, c0, r0, ct, -st,
                         g.plane(ch) + std::size_t(pr) * g.width, g.width, gs, ss);
  }
}

void patch_ncc_sums_window(const GeoRaster& win, const WorldPose& win_pose,
                           const GeoRaster& g, const WorldPose& pose,
                           double& gs, double& ss) {
  const double res = win.georef.resolution;
  const double ctp = std::cos(pose.heading), stp = std::sin(pose.heading);
  const double ctw = std::cos(win_pose.heading), stw = std::sin(win_pose.heading);
  // Window axes in world: right = (ctw, stw), up = (-stw, ctw).
  const double wc = double(win.width / 2), wr = double(win.height / 2);
  const double delta = pose.heading - win_pose.heading;
  const double dcol = std::cos(delta), drow = -std::sin(delta);
  const int cc = g.width / 2, cr = g.height / 2;
  const auto& k = kernels::active();
  for (int pr = 0; pr < g.height; ++pr) {
    const double up = double(cr - pr);
    const double de = pose.easting - win_pose.easting + res * (double(-cc) * ctp - up * stp);
    const double dn = pose.northing - win_pose.northing + res * (double(-cc) * stp + up * ctp);
    const double c0 = wc + (de * ctw + dn * stw) / res;
    const double r0 = wr - (-de * stw + dn * ctw) / res;
    for (int ch = 0; ch < win.channels; ++ch)
      k.bilinear_row_ncc(win.plane(ch), win.width, win.height, c0, r0, dcol, drow,
                         g.plane(ch) + std::size_t(pr) * g.width, g.width, gs, ss);
  }
}

ScanMatchResult scan_match(const GeoRaster& bev_sim, const GeoRaster& global_sim,
                           const WorldPose& center, double radius_m, double step_m,
                           const std::vector<double>& heading_offsets) {
  if (bev_sim.channels != 1 || global_sim.channels != 1)
    throw std::invalid_argument("scan_match: single-channel rasters required");
  if (bev_sim.width != bev_sim.height)
    throw std::invalid_argument("scan_match: square BEV required");
  if (!(radius_m > 0.0) || !(step_m > 0.0))
    throw std::invalid_argument("scan_match: radius and step must be positive");

  double gg = 0.0;
  kernels::active().sum_sq_accum(bev_sim.values.data(), bev_sim.values.size(), gg);
  if (gg <= 0.0) throw DegenerateInput("scan_match: all-zero BEV");

  const std::vector<double> offsets =
      heading_offsets.empty() ? std::vector<double>{0.0} : heading_offsets;
  const int n = bev_sim.width;
  const int m = int(std::floor(radius_m / step_m + 1e-9));
  const int side = 2 * m + 1;
  const double res = global_sim.georef.resolution;
  const double q = step_m / res;  // lattice spacing in map pixels

  const auto candidate_pose = [&](int i, int j, double theta) {
    const double ct = std::cos(theta), st = std::sin(theta);
    // right = (ct, st), up = (-st, ct)
    const double e = center.easting + step_m * (i * ct - j * st);
    const double no = center.northing + step_m * (i * st + j * ct);
    return WorldPose(e, no, theta);
  };

  // Distinct fractional lattice phases; few when step/res is a small
  // rational (e.g. 2.5 px -> {0, 0.5}).
  std::vector<double> fracs;
  for (int i = -m; i <= m; ++i) {
    const double o = i * q;
    const double f = o - std::floor(o);
    if (std::find(fracs.begin(), fracs.end(), f) == fracs.end()) fracs.push_back(f);
  }
  const bool fast = fracs.size() * fracs.size() <= 9;

  std::vector<Candidate> top;  // kept sorted by `better`, at most kTop
  constexpr std::size_t kTop = 8;
  const auto offer = [&](const Candidate& c) {
    auto it = std::lower_bound(top.begin(), top.end(), c, better);
    if (it == top.end() && top.size() >= kTop) return;
    top.insert(it, c);
    if (top.size() > kTop) top.pop_back();
  };

  const auto& kn = kernels::active();
  long index = 0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double theta = wrap_angle(center.heading + offsets[k]);
    if (!fast) {
      for (int j = -m; j <= m; ++j)
        for (int i = -m; i <= m; ++i, ++index) {
          const WorldPose p = candidate_pose(i, j, theta);
          double gs = 0.0, ss = 0.0;
          patch_ncc_sums(global_sim, bev_sim, p, gs, ss);
          offer(Candidate{ncc_value(gs, gg, ss),
                          double(i) * i + double(j) * j, std::abs(offsets[k]), index, i, j,
                          int(k)});
        }
      continue;
    }

    // Pre-rotated window so every candidate patch becomes a translation.
    const int margin = int(std::ceil(m * q)) + 2;
    const int W = n + 2 * margin;
    const GeoRaster win = resample_oriented(global_sim, WorldPose(center.easting,
                                                                  center.northing, theta),
                                            W, W);
    const int bw = W - 1;  // blended image side
    std::vector<float> blended(std::size_t(bw) * bw);

    for (double fy : fracs) {
      for (double fx : fracs) {
        for (int r = 0; r < bw; ++r)
          kn.bilinear_row(win.plane(0), W, W, fx, r + fy, 1.0, 0.0, bw,
                          blended.data() + std::size_t(r) * bw);

        for (int j = -m; j <= m; ++j) {
          const double oy = -double(j) * q;
          const double fyj = oy - std::floor(oy);
          if (fyj != fy) continue;
          const int row0 = W / 2 - n / 2 + int(std::floor(oy));
          for (int i = -m; i <= m; ++i) {
            const double ox = double(i) * q;
            const double fxi = ox - std::floor(ox);
            if (fxi != fx) continue;
            const int col0 = W / 2 - n / 2 + int(std::floor(ox));
            double gs = 0.0, ss = 0.0;
            for (int pr = 0; pr < n; ++pr)
              kn.masked_ncc_sums(bev_sim.plane(0) + std::size_t(pr) * n,
                                 blended.data() + std::size_t(row0 + pr) * bw + col0, n,
                                 gs, ss);
            const long idx = long(k) * side * side + long(j + m) * side + (i + m);
            offer(Candidate{ncc_value(gs, gg, ss),
                            double(i) * i + double(j) * j, std::abs(offsets[k]), idx, i, j,
                            int(k)});
          }
        }
      }
    }
    index += long(side) * side;
  }

  if (top.empty()) throw DegenerateInput("scan_match: empty candidate grid");

  // Rescore the leaders against the map directly (single interpolation) so
  // self-matches are exact and the final ranking is window-independent.
  if (fast) {
    for (Candidate& c : top) {
      const WorldPose p = candidate_pose(c.i, c.j, wrap_angle(center.heading + offsets[c.k]));
      double gs = 0.0, ss = 0.0;
      patch_ncc_sums(global_sim, bev_sim, p, gs, ss);
      c.score = ncc_value(gs, gg, ss);
    }
    std::sort(top.begin(), top.end(), better);
  }

  ScanMatchResult out;
  out.pose = candidate_pose(top[0].i, top[0].j,
                            wrap_angle(center.heading + offsets[top[0].k]));
  out.score = MatchScore{top[0].score};
  out.second_best = MatchScore{top.size() > 1 ? top[1].score : 0.0};
  return out;
}

}  // namespace similoc
