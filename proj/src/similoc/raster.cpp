#include "similoc/raster.hpp"

#include <cmath>
#include <stdexcept>

#include "similoc/kernels/kernels.hpp"

namespace similoc {
namespace {

inline float sample_plane(const float* src, int w, int h, double c, double r) {
  if (c < 0.0 || r < 0.0 || c > w - 1 || r > h - 1) return 0.0f;
  const int c0 = int(c), r0 = int(r);
  const int c1 = c0 + 1 < w ? c0 + 1 : c0;
  const int r1 = r0 + 1 < h ? r0 + 1 : r0;
  const float fx = float(c - c0), fy = float(r - r0);
  const float* a = src + std::size_t(r0) * w;
  const float* b = src + std::size_t(r1) * w;
  const float top = a[c0] * (1.0f - fx) + a[c1] * fx;
  const float bot = b[c0] * (1.0f - fx) + b[c1] * fx;
  return top * (1.0f - fy) + bot * fy;
}

inline bool nearest_is_hole(const GeoRaster& r, double c, double row) {
  const int ci = int(std::floor(c + 0.5)), ri = int(std::floor(row + 0.5));
  if (ci < 0 || ri < 0 || ci >= r.width || ri >= r.height) return true;
  return r.is_hole(ri, ci);
}

}  // namespace

void GeoRaster::world_to_pixel(double e, double n, double& col, double& row) const {
  if (orientation == 0.0) {
    georef.world_to_pixel(e, n, col, row);
    return;
  }
  double ce, cn;
  georef.pixel_to_world(double(width / 2), double(height / 2), ce, cn);
  const double ct = std::cos(orientation), st = std::sin(orientation);
  const double de = e - ce, dn = n - cn;
  // right = (ct, st), up = (-st, ct)
  col = double(width / 2) + (de * ct + dn * st) / georef.resolution;
  row = double(height / 2) - (-de * st + dn * ct) / georef.resolution;
}

void GeoRaster::pixel_to_world(double col, double row, double& e, double& n) const {
  if (orientation == 0.0) {
    georef.pixel_to_world(col, row, e, n);
    return;
  }
  double ce, cn;
  georef.pixel_to_world(double(width / 2), double(height / 2), ce, cn);
  const double ct = std::cos(orientation), st = std::sin(orientation);
  const double dc = col - double(width / 2), dr = double(height / 2) - row;
  e = ce + georef.resolution * (dc * ct - dr * st);
  n = cn + georef.resolution * (dc * st + dr * ct);
}

void bilinear_sample(const GeoRaster& raster, double col, double row, float* out) {
  for (int ch = 0; ch < raster.channels; ++ch)
    out[ch] = sample_plane(raster.plane(ch), raster.width, raster.height, col, row);
}

float bilinear_sample1(const GeoRaster& raster, double col, double row) {
  return sample_plane(raster.plane(0), raster.width, raster.height, col, row);
}

GeoRaster resample_oriented(const GeoRaster& raster, const WorldPose& center, int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("resample_oriented: empty output");
  if (!raster.georef.valid()) throw std::invalid_argument("resample_oriented: invalid georef");

  const double res = raster.georef.resolution;
  GeoRaster out(w, h, raster.channels,
                GeoRef::centered(center.easting, center.northing, res, w, h));
  out.orientation = center.heading;

  const double ct = std::cos(center.heading), st = std::sin(center.heading);
  const int cc = w / 2, cr = h / 2;
  // World position of output pixel (pc, pr):
  //   e = ce + res*((pc-cc)*ct - (cr-pr)*st)
  //   n = cn + res*((pc-cc)*st + (cr-pr)*ct)
  // both affine in pc with source-pixel steps (ct, -st).
  const auto& k = kernels::active();
  for (int pr = 0; pr < h; ++pr) {
    const double up = double(cr - pr);
    const double e0 = center.easting + res * (double(-cc) * ct - up * st);
    const double n0 = center.northing + res * (double(-cc) * st + up * ct);
    double c0, r0;
    raster.georef.world_to_pixel(e0, n0, c0, r0);
    for (int ch = 0; ch < raster.channels; ++ch)
      k.bilinear_row(raster.plane(ch), raster.width, raster.height,
                     c0, r0, ct, -st, w, out.plane(ch) + std::size_t(pr) * w);
  }
  return out;
}

GeoRaster extract_patch(const GeoRaster& raster, const WorldPose& center, int size_px) {
  if (size_px <= 0) throw std::invalid_argument("extract_patch: size_px must be positive");
  GeoRaster patch = resample_oriented(raster, center, size_px, size_px);
  patch.ensure_hole_mask();

  const double ct = std::cos(center.heading), st = std::sin(center.heading);
  const int cc = size_px / 2;
  for (int pr = 0; pr < size_px; ++pr) {
    const double up = double(cc - pr);
    const double e0 = center.easting + raster.georef.resolution * (double(-cc) * ct - up * st);
    const double n0 = center.northing + raster.georef.resolution * (double(-cc) * st + up * ct);
    double c0, r0;
    raster.georef.world_to_pixel(e0, n0, c0, r0);
    std::uint8_t* hrow = patch.holes.data() + std::size_t(pr) * size_px;
    if (raster.has_holes()) {
      for (int pc = 0; pc < size_px; ++pc)
        hrow[pc] = nearest_is_hole(raster, c0 + pc * ct, r0 - pc * st) ? 1 : 0;
    } else {
      for (int pc = 0; pc < size_px; ++pc) {
        const double c = c0 + pc * ct, r = r0 - pc * st;
        hrow[pc] = (c < 0.0 || r < 0.0 || c > raster.width - 1 || r > raster.height - 1) ? 1 : 0;
      }
    }
    for (int pc = 0; pc < size_px; ++pc) {
      if (hrow[pc]) {
        for (int ch = 0; ch < raster.channels; ++ch)
          patch.at(ch, pr, pc) = 0.0f;
      }
    }
  }
  return patch;
}

GeoRaster resample_to_resolution(const GeoRaster& raster, double new_res) {
  if (!(new_res > 0.0)) throw std::invalid_argument("resample_to_resolution: new_res must be > 0");
  const double ratio = new_res / raster.georef.resolution;
  const int nw = int(std::floor(raster.width / ratio));
  const int nh = int(std::floor(raster.height / ratio));
  if (nw < 1 || nh < 1)
    throw std::invalid_argument("resample_to_resolution: output would be empty");

  GeoRaster out(nw, nh, raster.channels,
                GeoRef{raster.georef.origin_easting, raster.georef.origin_northing, new_res});
  const auto& k = kernels::active();
  for (int r = 0; r < nh; ++r) {
    const double src_row = r * ratio;
    for (int ch = 0; ch < raster.channels; ++ch)
      k.bilinear_row(raster.plane(ch), raster.width, raster.height,
                     0.0, src_row, ratio, 0.0, nw, out.plane(ch) + std::size_t(r) * nw);
  }
  if (raster.has_holes()) {
    out.ensure_hole_mask();
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nw; ++c)
        if (nearest_is_hole(raster, c * ratio, r * ratio)) {
          out.holes[std::size_t(r) * nw + c] = 1;
          for (int ch = 0; ch < raster.channels; ++ch) out.at(ch, r, c) = 0.0f;
        }
  }
  return out;
}

}  // namespace similoc
