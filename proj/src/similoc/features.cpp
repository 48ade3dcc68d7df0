#include "similoc/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "similoc/errors.hpp"
#include "similoc/raster_io.hpp"

namespace similoc {
namespace {

// Box-filter moments over truncated 5x5 windows: sliding per-column band
// sums (double accumulators; float prefix sums would cancel on large
// rasters), then a sliding 5-wide horizontal sum.
void box_moments(const float* src, int w, int h, float* mean_out, float* std_out,
                 std::vector<double>& col_sum, std::vector<double>& col_sq) {
  col_sum.assign(std::size_t(w), 0.0);
  col_sq.assign(std::size_t(w), 0.0);
  const auto add_row = [&](int r, double sign) {
    const float* row = src + std::size_t(r) * w;
    for (int c = 0; c < w; ++c) {
      col_sum[c] += sign * row[c];
      col_sq[c] += sign * double(row[c]) * double(row[c]);
    }
  };
  for (int r = 0; r <= 2 && r < h; ++r) add_row(r, 1.0);

  const auto emit = [&](int r, int c, int rows_in, double run, double run_sq,
                        float* mrow, float* srow) {
    const int cols_in = std::min(c + 2, w - 1) - std::max(c - 2, 0) + 1;
    const double inv = 1.0 / (rows_in * cols_in);
    const double m = run * inv;
    const double var = run_sq * inv - m * m;
    mrow[c] = float(m);
    srow[c] = float(std::sqrt(var > 0.0 ? var : 0.0));
    (void)r;
  };

  for (int r = 0; r < h; ++r) {
    const int rows_in = std::min(r + 2, h - 1) - std::max(r - 2, 0) + 1;
    const double inv5 = 1.0 / (rows_in * 5);
    float* mrow = mean_out + std::size_t(r) * w;
    float* srow = std_out + std::size_t(r) * w;

    // Borders with clipped windows.
    for (int c = 0; c < std::min(2, w); ++c) {
      double run = 0.0, run_sq = 0.0;
      for (int k = std::max(c - 2, 0); k <= std::min(c + 2, w - 1); ++k) {
        run += col_sum[k];
        run_sq += col_sq[k];
      }
      emit(r, c, rows_in, run, run_sq, mrow, srow);
    }
    // Interior: direct 5-term sums, no loop-carried chain.
    const double* cs = col_sum.data();
    const double* cq = col_sq.data();
    for (int c = 2; c < w - 2; ++c) {
      const double run = cs[c - 2] + cs[c - 1] + cs[c] + cs[c + 1] + cs[c + 2];
      const double run_sq = cq[c - 2] + cq[c - 1] + cq[c] + cq[c + 1] + cq[c + 2];
      const double m = run * inv5;
      const double var = run_sq * inv5 - m * m;
      mrow[c] = float(m);
      srow[c] = float(std::sqrt(var > 0.0 ? var : 0.0));
    }
    for (int c = std::max(w - 2, 2); c < w; ++c) {
      double run = 0.0, run_sq = 0.0;
      for (int k = std::max(c - 2, 0); k <= std::min(c + 2, w - 1); ++k) {
        run += col_sum[k];
        run_sq += col_sq[k];
      }
      emit(r, c, rows_in, run, run_sq, mrow, srow);
    }

    if (r + 3 < h) add_row(r + 3, 1.0);
    if (r - 2 >= 0) add_row(r - 2, -1.0);
  }
}

}  // namespace

void FeatureMap::world_to_pixel(double e, double n, double& col, double& row) const {
  GeoRaster proxy;
  proxy.width = width;
  proxy.height = height;
  proxy.georef = georef;
  proxy.orientation = orientation;
  proxy.world_to_pixel(e, n, col, row);
}

FeatureMap embed_default(const GeoRaster& color) {
  if (color.channels != 3)
    throw std::invalid_argument("embed_default: 3-channel raster required");

  const int w = color.width, h = color.height;
  FeatureMap fm(w, h, kDefaultEmbedDim);
  fm.georef = color.georef;
  fm.orientation = color.orientation;
  const std::size_t n = fm.plane_size();

  for (int ch = 0; ch < 3; ++ch)
    std::memcpy(fm.plane(ch), color.plane(ch), n * sizeof(float));

  std::vector<double> sat, sat_sq;
  for (int ch = 0; ch < 3; ++ch)
    box_moments(color.plane(ch), w, h, fm.plane(3 + ch), fm.plane(6 + ch), sat, sat_sq);

  // Luminance gradient magnitude, central differences, one-sided at borders.
  std::vector<float> lum(n);
  {
    const float* r = color.plane(0);
    const float* g = color.plane(1);
    const float* b = color.plane(2);
    for (std::size_t i = 0; i < n; ++i) lum[i] = (r[i] + g[i] + b[i]) * (1.0f / 3.0f);
  }
  float* grad = fm.plane(9);
  for (int r = 0; r < h; ++r) {
    const float* row = lum.data() + std::size_t(r) * w;
    const float* up = lum.data() + std::size_t(r > 0 ? r - 1 : r) * w;
    const float* dn = lum.data() + std::size_t(r < h - 1 ? r + 1 : r) * w;
    const float ry = (r > 0 && r < h - 1) ? 0.5f : 1.0f;
    for (int c = 0; c < w; ++c) {
      const int cl = c > 0 ? c - 1 : c;
      const int cr = c < w - 1 ? c + 1 : c;
      const float rx = (c > 0 && c < w - 1) ? 0.5f : 1.0f;
      const float gx = (row[cr] - row[cl]) * rx;
      const float gy = (dn[c] - up[c]) * ry;
      grad[std::size_t(r) * w + c] = std::sqrt(gx * gx + gy * gy);
    }
  }

  float* bias = fm.plane(10);
  for (std::size_t i = 0; i < n; ++i) bias[i] = 1.0f;

  if (color.has_holes()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (color.holes[i]) {
        for (int d = 0; d < kDefaultEmbedDim; ++d) fm.plane(d)[i] = 0.0f;
      }
    }
  }
  return fm;
}

void save_feature_map(const FeatureMap& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  char header[64];
  std::snprintf(header, sizeof(header), "FMAP %d %d %d\n", fm.width, fm.height, fm.dim);
  out.write(header, std::streamsize(std::strlen(header)));

  // In-memory layout is plane-major; the file is pixel-major.
  std::vector<float> row(std::size_t(fm.width) * fm.dim);
  for (int r = 0; r < fm.height; ++r) {
    for (int c = 0; c < fm.width; ++c)
      for (int d = 0; d < fm.dim; ++d)
        row[std::size_t(c) * fm.dim + d] = fm.plane(d)[std::size_t(r) * fm.width + c];
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path);

  char buf[40];
  const auto fmt = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
  };
  std::ofstream geo(sidecar_path(path, "geo"));
  if (!geo) throw IoError("cannot open for writing: " + sidecar_path(path, "geo"));
  geo << "origin_easting " << fmt(fm.georef.origin_easting) << "\norigin_northing "
      << fmt(fm.georef.origin_northing) << "\nresolution " << fmt(fm.georef.resolution)
      << "\n";
}

FeatureMap load_feature_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing FMAP header: " + path);
  int w = 0, h = 0, d = 0;
  if (std::sscanf(header.c_str(), "FMAP %d %d %d", &w, &h, &d) != 3 || w <= 0 || h <= 0 ||
      d <= 0)
    throw ParseError("malformed FMAP header: " + path);

  FeatureMap fm(w, h, d);
  std::vector<float> row(std::size_t(w) * d);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * sizeof(float)));
    if (!in) throw ParseError("truncated FMAP payload: " + path);
    for (int c = 0; c < w; ++c)
      for (int dd = 0; dd < d; ++dd)
        fm.plane(dd)[std::size_t(r) * w + c] = row[std::size_t(c) * d + dd];
  }

  const std::string geo_path = sidecar_path(path, "geo");
  std::ifstream geo(geo_path);
  if (!geo) throw ParseError("missing geo sidecar: " + geo_path);
  std::string key;
  double value;
  bool got_e = false, got_n = false, got_r = false;
  while (geo >> key >> value) {
    if (key == "origin_easting") { fm.georef.origin_easting = value; got_e = true; }
    else if (key == "origin_northing") { fm.georef.origin_northing = value; got_n = true; }
    else if (key == "resolution") { fm.georef.resolution = value; got_r = true; }
    else throw ParseError("unknown key '" + key + "' in " + geo_path);
  }
  if (!got_e || !got_n || !got_r) throw ParseError("incomplete geo sidecar: " + geo_path);
  return fm;
}

}  // namespace similoc
