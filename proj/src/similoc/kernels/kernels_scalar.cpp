#include <cmath>
#include <cstddef>
#include <cstdint>

#include "similoc/kernels/kernels.hpp"

namespace similoc::kernels {
namespace {

void ncc_sums_scalar(const float* g, const float* s, std::size_t n,
                     double& gs, double& gg, double& ss) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i], si = s[i];
    a += gi * si;
    b += gi * gi;
    c += si * si;
  }
  gs += a;
  gg += b;
  ss += c;
}

void masked_ncc_sums_scalar(const float* g, const float* s, std::size_t n,
                            double& gs, double& ss_obs) {
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i], si = s[i];
    a += gi * si;
    if (gi != 0.0) b += si * si;
  }
  gs += a;
  ss_obs += b;
}

void dot_accum_scalar(const float* a, const float* b, std::size_t n, double& acc) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += double(a[i]) * double(b[i]);
  acc += sum;
}

void sum_sq_accum_scalar(const float* a, std::size_t n, double& acc) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += double(a[i]) * double(a[i]);
  acc += sum;
}

inline float sample_bilinear(const float* src, int w, int h, double c, double r) {
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

void bilinear_row_scalar(const float* src, int w, int h,
                         double c0, double r0, double dc, double dr,
                         int n, float* dst) {
  for (int i = 0; i < n; ++i)
    dst[i] = sample_bilinear(src, w, h, c0 + i * dc, r0 + i * dr);
}

void bilinear_row_ncc_scalar(const float* src, int w, int h,
                             double c0, double r0, double dc, double dr,
                             const float* g, int n, double& gs, double& ss_obs) {
  double a = 0.0, b = 0.0;
  for (int i = 0; i < n; ++i) {
    if (g[i] == 0.0f) continue;
    const double v = sample_bilinear(src, w, h, c0 + i * dc, r0 + i * dr);
    a += double(g[i]) * v;
    b += v * v;
  }
  gs += a;
  ss_obs += b;
}

void bin_points_scalar(const float* xs, const float* ys, std::size_t n,
                       float a_col, float b_col, float a_row, float b_row,
                       float ce, float cn, float cc, int size, int* cols, int* rows) {
  for (std::size_t i = 0; i < n; ++i) {
    const float dx = xs[i] - ce, dy = ys[i] - cn;
    const float u = a_col * dx + b_col * dy + cc;
    const float v = a_row * dx + b_row * dy + cc;
    const int col = int(std::floor(u + 0.5f));
    const int row = int(std::floor(v + 0.5f));
    const bool ok = col >= 0 && row >= 0 && col < size && row < size;
    cols[i] = ok ? col : -1;
    rows[i] = row;
  }
}

void cosine_max_map_scalar(const float* const* planes, int dim,
                           const float* protos, int num_protos,
                           float* out, std::uint8_t* holes, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    float norm_sq = 0.0f;
    for (int d = 0; d < dim; ++d) norm_sq += planes[d][i] * planes[d][i];
    const bool hole = norm_sq < 1e-12f;
    if (holes) holes[i] = hole ? 1 : 0;
    if (hole) {
      out[i] = 0.0f;
      continue;
    }
    float best = 0.0f;
    for (int k = 0; k < num_protos; ++k) {
      const float* p = protos + std::size_t(k) * dim;
      float dot = 0.0f;
      for (int d = 0; d < dim; ++d) dot += p[d] * planes[d][i];
      if (dot > best) best = dot;
    }
    float v = best / std::sqrt(norm_sq);
    if (v < 0.0f) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    out[i] = v;
  }
}

}  // namespace

const Backend& scalar() {
  static const Backend backend{
      "scalar",         ncc_sums_scalar,        masked_ncc_sums_scalar,
      dot_accum_scalar,
      sum_sq_accum_scalar, bilinear_row_scalar, bilinear_row_ncc_scalar,
      cosine_max_map_scalar, bin_points_scalar,
  };
  return backend;
}

}  // namespace similoc::kernels
