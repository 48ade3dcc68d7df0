#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace similoc::kernels {

// Hot inner loops, provided as a scalar reference implementation and an
// AVX2 variant selected at runtime. All sums accumulate in double no matter
// the storage precision. Sample coordinates are evaluated in double as
// c_i = c0 + i*dc (never incrementally) so every backend sees identical
// sampling positions; the 2x2 blend itself runs in float.
//
// Bilinear semantics: value 0 outside [0, w-1] x [0, h-1], stored value
// exactly at integer coordinates.
struct Backend {
  const char* name;

  // gs += sum(g*s), gg += sum(g*g), ss += sum(s*s) over n contiguous floats.
  void (*ncc_sums)(const float* g, const float* s, std::size_t n,
                   double& gs, double& gg, double& ss);

  // Patch-scoring sums: gs += sum(g*s), ss_obs += sum of s*s restricted to
  // pixels where g != 0 (the observed support of the template).
  void (*masked_ncc_sums)(const float* g, const float* s, std::size_t n,
                          double& gs, double& ss_obs);

  // acc += sum(a*b).
  void (*dot_accum)(const float* a, const float* b, std::size_t n, double& acc);

  // acc += sum(a*a).
  void (*sum_sq_accum)(const float* a, std::size_t n, double& acc);

  // dst[i] = bilinear(src, c0 + i*dc, r0 + i*dr) for i in [0, n).
  void (*bilinear_row)(const float* src, int src_w, int src_h,
                       double c0, double r0, double dc, double dr,
                       int n, float* dst);

  // Fused row sampling + patch-scoring sums: with v_i as in bilinear_row,
  // gs += sum(g[i]*v_i), ss_obs += sum of v_i*v_i where g[i] != 0. Avoids
  // materializing patches.
  void (*bilinear_row_ncc)(const float* src, int src_w, int src_h,
                           double c0, double r0, double dc, double dr,
                           const float* g, int n, double& gs, double& ss_obs);

  // Per-pixel max cosine similarity against unit-norm prototypes.
  // planes: dim pointers to n-length feature planes; protos: row-major
  // [num_protos][dim]. out[i] = clamp(max_k dot_k / ||f_i||, 0, 1), and 0
  // where ||f_i||^2 < 1e-12; those zero-feature pixels are also flagged in
  // holes (1) when a holes buffer is supplied.
  void (*cosine_max_map)(const float* const* planes, int dim,
                         const float* protos, int num_protos,
                         float* out, std::uint8_t* holes, std::size_t n);

  // Raster binning transform: for each point,
  //   u = a_col*(x-ce) + b_col*(y-cn) + cc,  v = a_row*(x-ce) + b_row*(y-cn) + cc,
  //   col = floor(u + 0.5), row = floor(v + 0.5);
  // cols[i] = -1 when the bin falls outside [0, size)^2, else col, with
  // rows[i] the matching row.
  void (*bin_points)(const float* xs, const float* ys, std::size_t n,
                     float a_col, float b_col, float a_row, float b_row,
                     float ce, float cn, float cc, int size, int* cols, int* rows);
};

const Backend& scalar();
#if defined(SIMILOC_HAVE_AVX2)
const Backend& avx2();
#endif

// Backend in use; picked at startup from CPU capabilities, overridable via
// the SIMILOC_KERNELS environment variable ("scalar" or "avx2").
const Backend& active();
void set_active(const std::string& name);  // throws std::invalid_argument
std::vector<const Backend*> available();

}  // namespace similoc::kernels
