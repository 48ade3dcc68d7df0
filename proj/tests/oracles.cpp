#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "similoc/angles.hpp"
#include "similoc/rng.hpp"

namespace similoc::oracle {

double ncc_brute(const std::vector<float>& g, const std::vector<float>& s) {
  double gs = 0.0, gg = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    gs += double(g[i]) * double(s[i]);
    gg += double(g[i]) * double(g[i]);
    ss += double(s[i]) * double(s[i]);
  }
  if (gg <= 0.0 || ss <= 0.0) return 0.0;
  return gs / std::sqrt(gg * ss);
}

double bilinear_brute(const GeoRaster& r, int ch, double col, double row) {
  if (col < 0.0 || row < 0.0 || col > r.width - 1 || row > r.height - 1) return 0.0;
  const int c0 = int(std::floor(col)), r0 = int(std::floor(row));
  const int c1 = std::min(c0 + 1, r.width - 1), r1 = std::min(r0 + 1, r.height - 1);
  const double fx = col - c0, fy = row - r0;
  const double v00 = r.at(ch, r0, c0), v01 = r.at(ch, r0, c1);
  const double v10 = r.at(ch, r1, c0), v11 = r.at(ch, r1, c1);
  return (v00 * (1 - fx) + v01 * fx) * (1 - fy) + (v10 * (1 - fx) + v11 * fx) * fy;
}

GeoRaster extract_patch_brute(const GeoRaster& src, const WorldPose& center, int size_px) {
  GeoRaster out(size_px, size_px, src.channels,
                GeoRef::centered(center.easting, center.northing, src.georef.resolution,
                                 size_px, size_px));
  out.orientation = center.heading;
  const double res = src.georef.resolution;
  const double ct = std::cos(center.heading), st = std::sin(center.heading);
  const int cc = size_px / 2;
  for (int pr = 0; pr < size_px; ++pr) {
    for (int pc = 0; pc < size_px; ++pc) {
      const double right = double(pc - cc), up = double(cc - pr);
      const double e = center.easting + res * (right * ct - up * st);
      const double n = center.northing + res * (right * st + up * ct);
      double col, row;
      src.georef.world_to_pixel(e, n, col, row);
      for (int ch = 0; ch < src.channels; ++ch)
        out.at(ch, pr, pc) = float(bilinear_brute(src, ch, col, row));
    }
  }
  return out;
}

ScanMatchResult scan_match_brute(const GeoRaster& bev, const GeoRaster& map,
                                 const WorldPose& center, double radius, double step,
                                 const std::vector<double>& heading_offsets) {
  const int m = int(std::floor(radius / step + 1e-9));
  ScanMatchResult best;
  best.score.value = -1.0;
  double best_dist = 0.0, best_hdg = 0.0;
  double second = -1.0;
  for (double off : heading_offsets) {
    const double theta = wrap_angle(center.heading + off);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int j = -m; j <= m; ++j) {
      for (int i = -m; i <= m; ++i) {
        const WorldPose cand(center.easting + step * (i * ct - j * st),
                             center.northing + step * (i * st + j * ct), theta);
        const GeoRaster patch = extract_patch_brute(map, cand, bev.width);
        const double score = ncc_brute(bev.values, patch.values);
        const double dist = double(i) * i + double(j) * j;
        const double hdg = std::abs(off);
        const bool better =
            score > best.score.value ||
            (score == best.score.value &&
             (dist < best_dist || (dist == best_dist && hdg < best_hdg)));
        if (better) {
          second = best.score.value;
          best.pose = cand;
          best.score.value = score;
          best_dist = dist;
          best_hdg = hdg;
        } else if (score > second) {
          second = score;
        }
      }
    }
  }
  best.second_best.value = std::max(second, 0.0);
  return best;
}

double neff_brute(const std::vector<double>& weights) {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return 1.0 / s;
}

double ate_brute(const Trajectory& pred, const Trajectory& gt, double tol_sec) {
  double sum = 0.0;
  int paired = 0;
  for (const auto& p : pred.points) {
    double best_dt = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < gt.points.size(); ++j) {
      const double dt = std::abs(gt.points[j].t - p.t);
      if (dt < best_dt) {
        best_dt = dt;
        best_j = j;
      }
    }
    if (best_dt <= tol_sec) {
      sum += std::hypot(p.easting - gt.points[best_j].easting,
                        p.northing - gt.points[best_j].northing);
      ++paired;
    }
  }
  return paired > 0 ? sum / paired : std::numeric_limits<double>::quiet_NaN();
}

double lpe_brute(const Trajectory& pred, const Trajectory& gt) {
  double sum = 0.0;
  for (const auto& p : pred.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : gt.points)
      best = std::min(best, std::hypot(p.easting - q.easting, p.northing - q.northing));
    sum += best;
  }
  return sum / double(pred.points.size());
}

Trajectory integrate_world_deltas(const WorldPose& start, const std::vector<double>& ts,
                                  const std::vector<double>& dx,
                                  const std::vector<double>& dy,
                                  const std::vector<double>& dth) {
  Trajectory out;
  out.has_heading = true;
  double e = start.easting, n = start.northing, h = start.heading;
  out.points.push_back({ts.empty() ? 0.0 : ts.front() - 1.0, e, n, h});
  for (std::size_t i = 0; i < dx.size(); ++i) {
    e += dx[i];
    n += dy[i];
    h = wrap_angle(h + dth[i]);
    out.points.push_back({ts[i], e, n, h});
  }
  return out;
}

std::vector<std::vector<double>> kmeans_cosine(const std::vector<std::vector<float>>& vecs,
                                               int k, int iterations, std::uint64_t seed) {
  const int dim = int(vecs.front().size());
  std::vector<std::vector<double>> units;
  for (const auto& v : vecs) {
    double norm = 0.0;
    for (float x : v) norm += double(x) * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    std::vector<double> u(dim);
    for (int d = 0; d < dim; ++d) u[d] = v[d] / norm;
    units.push_back(std::move(u));
  }

  Rng rng(seed);
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < k; ++c)
    centers.push_back(units[rng.uniform_index(units.size())]);

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    for (const auto& u : units) {
      int best = 0;
      double best_dot = -2.0;
      for (int c = 0; c < k; ++c) {
        double dot = 0.0;
        for (int d = 0; d < dim; ++d) dot += centers[c][d] * u[d];
        if (dot > best_dot) {
          best_dot = dot;
          best = c;
        }
      }
      for (int d = 0; d < dim; ++d) sums[best][d] += u[d];
    }
    for (int c = 0; c < k; ++c) {
      double norm = 0.0;
      for (double x : sums[c]) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-12)
        for (int d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / norm;
    }
  }
  return centers;
}

}  // namespace similoc::oracle
