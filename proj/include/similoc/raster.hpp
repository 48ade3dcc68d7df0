#pragma once

#include <cstdint>
#include <vector>

#include "similoc/georef.hpp"
#include "similoc/pose.hpp"

namespace similoc {

// North-up geo-referenced raster, planar channel storage (channel-major,
// then row-major). Channels: 1 for similarity/mask data, 3 for color.
// Values live in [0, 1]; hole pixels (unobserved) carry value 0 in every
// channel and are flagged in `holes` when a mask is present.
struct GeoRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  GeoRef georef;
  // Rotation of the pixel grid: raster-up points along (-sin, cos) of this
  // angle. 0 for north-up maps; BEV rasters and oriented patches record the
  // pose heading they were built with. The georef always describes the
  // raster center through pixel (width/2, height/2).
  double orientation = 0.0;
  std::vector<float> values;        // channels * height * width
  std::vector<std::uint8_t> holes;  // empty, or height * width (1 = hole)

  GeoRaster() = default;
  GeoRaster(int w, int h, int ch, const GeoRef& g, float fill = 0.0f)
      : width(w), height(h), channels(ch), georef(g),
        values(std::size_t(w) * h * ch, fill) {}

  // World <-> pixel honoring the grid orientation.
  void world_to_pixel(double e, double n, double& col, double& row) const;
  void pixel_to_world(double col, double row, double& e, double& n) const;

  std::size_t plane_size() const { return std::size_t(width) * height; }
  float* plane(int ch) { return values.data() + plane_size() * ch; }
  const float* plane(int ch) const { return values.data() + plane_size() * ch; }

  float at(int ch, int row, int col) const {
    return values[plane_size() * ch + std::size_t(row) * width + col];
  }
  float& at(int ch, int row, int col) {
    return values[plane_size() * ch + std::size_t(row) * width + col];
  }

  bool has_holes() const { return !holes.empty(); }
  bool is_hole(int row, int col) const {
    return has_holes() && holes[std::size_t(row) * width + col] != 0;
  }
  void ensure_hole_mask(std::uint8_t fill = 0) {
    if (holes.empty()) holes.assign(plane_size(), fill);
  }
};

// Bilinear sample of every channel at fractional pixel coordinates; zero
// outside [0, width-1] x [0, height-1]. `out` receives `channels` floats.
void bilinear_sample(const GeoRaster& raster, double col, double row, float* out);
float bilinear_sample1(const GeoRaster& raster, double col, double row);

// size_px x size_px patch at the raster's resolution centered on `center`,
// rotated so patch-up is the pose's forward direction (heading 0 keeps the
// patch axis-aligned with the north-up source). The pose lands on patch
// pixel (size_px/2, size_px/2). Out-of-bounds and hole-sourced pixels are
// holes; the patch georef records the patch's own center.
GeoRaster extract_patch(const GeoRaster& raster, const WorldPose& center, int size_px);

// extract_patch without hole bookkeeping (values only, w x h rect); the
// sampling grid is identical. Out-of-bounds samples are 0.
GeoRaster resample_oriented(const GeoRaster& raster, const WorldPose& center, int w, int h);

// Same world extent at a new resolution (dimensions rounded down), values
// bilinearly interpolated. Throws std::invalid_argument on new_res <= 0.
GeoRaster resample_to_resolution(const GeoRaster& raster, double new_res);

}  // namespace similoc
