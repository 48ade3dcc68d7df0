#pragma once

#include <functional>
#include <string>
#include <vector>

#include "similoc/raster.hpp"

namespace similoc {

// Per-pixel feature vectors in planar layout (dim planes of width*height),
// georef and orientation inherited from the source raster.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int dim = 0;
  GeoRef georef;
  double orientation = 0.0;
  std::vector<float> planes;  // dim * height * width

  FeatureMap() = default;
  FeatureMap(int w, int h, int d)
      : width(w), height(h), dim(d), planes(std::size_t(w) * h * d, 0.0f) {}

  std::size_t plane_size() const { return std::size_t(width) * height; }
  float* plane(int d) { return planes.data() + plane_size() * d; }
  const float* plane(int d) const { return planes.data() + plane_size() * d; }

  std::vector<float> vector_at(int row, int col) const {
    std::vector<float> v(dim);
    const std::size_t i = std::size_t(row) * width + col;
    for (int d = 0; d < dim; ++d) v[d] = plane(d)[i];
    return v;
  }

  void world_to_pixel(double e, double n, double& col, double& row) const;
};

// Deterministic mapping from a color raster to a feature map. Same input
// must produce bit-identical output.
using Embedder = std::function<FeatureMap(const GeoRaster&)>;

inline constexpr int kDefaultEmbedDim = 11;

// Hand-crafted default descriptor, 11 values per pixel:
//   [r, g, b, mean5(r), mean5(g), mean5(b), std5(r), std5(g), std5(b),
//    |grad(luminance)|, 1]
// 5x5 windows truncated at raster borders; luminance gradient by central
// differences (one-sided at borders). Hole pixels get the zero vector.
FeatureMap embed_default(const GeoRaster& color);

// Binary feature map file: header "FMAP <width> <height> <dim>\n", then
// row-major pixel-major little-endian float32, plus the usual ".geo"
// sidecar.
void save_feature_map(const FeatureMap& fm, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

}  // namespace similoc
