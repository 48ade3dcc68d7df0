#include "similoc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "similoc/errors.hpp"
#include "similoc/kernels/kernels.hpp"

namespace similoc {

PlannedPath PlannedPath::from_points(const std::vector<Waypoint>& pts) {
  PlannedPath path;
  for (const Waypoint& p : pts) {
    if (!path.points.empty()) {
      const Waypoint& last = path.points.back();
      if (p.easting == last.easting && p.northing == last.northing) continue;
    }
    path.points.push_back(p);
  }
  path.arclength.resize(path.points.size());
  double s = 0.0;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const double de = path.points[i].easting - path.points[i - 1].easting;
    const double dn = path.points[i].northing - path.points[i - 1].northing;
    s += std::hypot(de, dn);
    path.arclength[i] = s;
  }
  return path;
}

PlannedPath::Waypoint PlannedPath::at(double s) const {
  if (points.empty()) return {};
  if (s <= 0.0) return points.front();
  if (s >= length()) return points.back();
  const auto it = std::upper_bound(arclength.begin(), arclength.end(), s);
  const std::size_t i = std::size_t(it - arclength.begin());
  const double seg = arclength[i] - arclength[i - 1];
  const double t = seg > 0.0 ? (s - arclength[i - 1]) / seg : 0.0;
  return {points[i - 1].easting + t * (points[i].easting - points[i - 1].easting),
          points[i - 1].northing + t * (points[i].northing - points[i - 1].northing)};
}

void PlannedPath::tangent(double s, double& te, double& tn) const {
  te = 1.0;
  tn = 0.0;
  if (points.size() < 2) return;
  std::size_t i;
  if (s <= 0.0) i = 1;
  else if (s >= length()) i = points.size() - 1;
  else i = std::size_t(std::upper_bound(arclength.begin(), arclength.end(), s) -
                       arclength.begin());
  const double de = points[i].easting - points[i - 1].easting;
  const double dn = points[i].northing - points[i - 1].northing;
  const double len = std::hypot(de, dn);
  if (len > 0.0) {
    te = de / len;
    tn = dn / len;
  }
}

GeoRaster similarity_map(const FeatureMap& fm, const PrototypeSet& ps) {
  if (ps.empty()) throw DegenerateInput("similarity_map: empty prototype set");
  if (ps.dim() != fm.dim)
    throw std::invalid_argument("similarity_map: feature/prototype dimension mismatch");

  GeoRaster out(fm.width, fm.height, 1, fm.georef);
  out.orientation = fm.orientation;
  out.ensure_hole_mask();

  // Hole pixels are exactly the zero-feature ones; the kernel flags them.
  std::vector<const float*> planes(fm.dim);
  for (int d = 0; d < fm.dim; ++d) planes[d] = fm.plane(d);
  kernels::active().cosine_max_map(planes.data(), fm.dim, ps.flat().data(), ps.size(),
                                   out.plane(0), out.holes.data(), fm.plane_size());
  return out;
}

GeoRaster build_global_simimap(const GeoRaster& satellite, const PlannedPath& path,
                               const SimimapParams& params, const Embedder& embedder) {
  if (satellite.channels != 3)
    throw std::invalid_argument("build_global_simimap: color satellite raster required");
  if (!(params.sample_interval > 0.0) || params.patch_px <= 0)
    throw std::invalid_argument("build_global_simimap: bad parameters");

  // The path must meaningfully intersect the raster.
  int inside = 0;
  for (const auto& p : path.points) {
    double c, r;
    satellite.georef.world_to_pixel(p.easting, p.northing, c, r);
    if (c >= 0 && r >= 0 && c <= satellite.width - 1 && r <= satellite.height - 1) ++inside;
    if (inside >= 2) break;
  }
  if (inside < 2)
    throw DegenerateInput("build_global_simimap: planned path lies outside the satellite map");

  GeoRaster out(satellite.width, satellite.height, 1, satellite.georef);
  out.ensure_hole_mask(1);
  float* acc = out.plane(0);

  const double res = satellite.georef.resolution;
  const int m = params.patch_px;

  for (double s = 0.0; s <= path.length(); s += params.sample_interval) {
    const PlannedPath::Waypoint wp = path.at(s);
    // Snap the reference point to a pixel center so the patch is an exact
    // axis-aligned crop.
    double col, row;
    satellite.georef.world_to_pixel(wp.easting, wp.northing, col, row);
    const long ci = std::lround(col), ri = std::lround(row);
    double ce, cn;
    satellite.georef.pixel_to_world(double(ci), double(ri), ce, cn);

    const GeoRaster patch = resample_oriented(satellite, WorldPose(ce, cn, 0.0), m, m);
    const FeatureMap fm = embedder(patch);

    // Path pixels inside this patch drive the prototypes.
    PrototypeSet protos(fm.dim, params.prototypes);
    std::vector<WorldPose> probes;
    for (double t = 0.0; t <= path.length(); t += res) {
      const PlannedPath::Waypoint q = path.at(t);
      double qc, qr;
      fm.world_to_pixel(q.easting, q.northing, qc, qr);
      if (qc < 0 || qr < 0 || qc > m - 1 || qr > m - 1) continue;
      probes.emplace_back(q.easting, q.northing, 0.0);
    }
    protos.update(sample_traversability_vectors(fm, probes));
    if (protos.empty()) continue;

    const GeoRaster patch_sim = similarity_map(fm, protos);

    // Patch pixel (pr, pc) sits on satellite pixel (ri - m/2 + pr, ci - m/2 + pc).
    const long row0 = ri - m / 2, col0 = ci - m / 2;
    for (int pr = 0; pr < m; ++pr) {
      const long gr = row0 + pr;
      if (gr < 0 || gr >= satellite.height) continue;
      const float* src = patch_sim.plane(0) + std::size_t(pr) * m;
      const std::uint8_t* src_holes = patch_sim.holes.data() + std::size_t(pr) * m;
      for (int pc = 0; pc < m; ++pc) {
        const long gc = col0 + pc;
        if (gc < 0 || gc >= satellite.width) continue;
        if (src_holes[pc]) continue;
        const std::size_t gi = std::size_t(gr) * satellite.width + gc;
        if (out.holes[gi]) {
          out.holes[gi] = 0;
          acc[gi] = src[pc];
        } else if (src[pc] > acc[gi]) {
          acc[gi] = src[pc];
        }
      }
    }
  }
  return out;
}

}  // namespace similoc
