#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "similoc/kernels/kernels.hpp"

// AVX2 variants. Sample coordinates are computed per pixel in double with
// the same formulas as the scalar backend, so both backends agree on which
// source pixels a sample touches; only the float blend may differ by ulps
// (FMA contraction).

namespace similoc::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

void ncc_sums_avx2(const float* g, const float* s, std::size_t n,
                   double& gs, double& gg, double& ss) {
  __m256d gs0 = _mm256_setzero_pd(), gs1 = _mm256_setzero_pd();
  __m256d gg0 = _mm256_setzero_pd(), gg1 = _mm256_setzero_pd();
  __m256d ss0 = _mm256_setzero_pd(), ss1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    const __m256 sv = _mm256_loadu_ps(s + i);
    const __m256d glo = _mm256_cvtps_pd(_mm256_castps256_ps128(gv));
    const __m256d ghi = _mm256_cvtps_pd(_mm256_extractf128_ps(gv, 1));
    const __m256d slo = _mm256_cvtps_pd(_mm256_castps256_ps128(sv));
    const __m256d shi = _mm256_cvtps_pd(_mm256_extractf128_ps(sv, 1));
    gs0 = _mm256_fmadd_pd(glo, slo, gs0);
    gs1 = _mm256_fmadd_pd(ghi, shi, gs1);
    gg0 = _mm256_fmadd_pd(glo, glo, gg0);
    gg1 = _mm256_fmadd_pd(ghi, ghi, gg1);
    ss0 = _mm256_fmadd_pd(slo, slo, ss0);
    ss1 = _mm256_fmadd_pd(shi, shi, ss1);
  }
  double a = hsum(_mm256_add_pd(gs0, gs1));
  double b = hsum(_mm256_add_pd(gg0, gg1));
  double c = hsum(_mm256_add_pd(ss0, ss1));
  for (; i < n; ++i) {
    const double gi = g[i], si = s[i];
    a += gi * si;
    b += gi * gi;
    c += si * si;
  }
  gs += a;
  gg += b;
  ss += c;
}

void masked_ncc_sums_avx2(const float* g, const float* s, std::size_t n,
                          double& gs, double& ss_obs) {
  __m256d gs0 = _mm256_setzero_pd(), gs1 = _mm256_setzero_pd();
  __m256d ss0 = _mm256_setzero_pd(), ss1 = _mm256_setzero_pd();
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    const __m256 sv = _mm256_loadu_ps(s + i);
    const __m256 sm = _mm256_and_ps(sv, _mm256_cmp_ps(gv, zero, _CMP_NEQ_OQ));
    const __m256d glo = _mm256_cvtps_pd(_mm256_castps256_ps128(gv));
    const __m256d ghi = _mm256_cvtps_pd(_mm256_extractf128_ps(gv, 1));
    const __m256d slo = _mm256_cvtps_pd(_mm256_castps256_ps128(sv));
    const __m256d shi = _mm256_cvtps_pd(_mm256_extractf128_ps(sv, 1));
    const __m256d mlo = _mm256_cvtps_pd(_mm256_castps256_ps128(sm));
    const __m256d mhi = _mm256_cvtps_pd(_mm256_extractf128_ps(sm, 1));
    gs0 = _mm256_fmadd_pd(glo, slo, gs0);
    gs1 = _mm256_fmadd_pd(ghi, shi, gs1);
    ss0 = _mm256_fmadd_pd(mlo, mlo, ss0);
    ss1 = _mm256_fmadd_pd(mhi, mhi, ss1);
  }
  double a = hsum(_mm256_add_pd(gs0, gs1));
  double b = hsum(_mm256_add_pd(ss0, ss1));
  for (; i < n; ++i) {
    const double gi = g[i], si = s[i];
    a += gi * si;
    if (gi != 0.0) b += si * si;
  }
  gs += a;
  ss_obs += b;
}

void dot_accum_avx2(const float* a, const float* b, std::size_t n, double& acc) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m256 av = _mm256_loadu_ps(a + i);
    const __m256 bv = _mm256_loadu_ps(b + i);
    const __m256 av2 = _mm256_loadu_ps(a + i + 8);
    const __m256 bv2 = _mm256_loadu_ps(b + i + 8);
    s0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(av)),
                         _mm256_cvtps_pd(_mm256_castps256_ps128(bv)), s0);
    s1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(av, 1)),
                         _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1)), s1);
    s2 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(av2)),
                         _mm256_cvtps_pd(_mm256_castps256_ps128(bv2)), s2);
    s3 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(av2, 1)),
                         _mm256_cvtps_pd(_mm256_extractf128_ps(bv2, 1)), s3);
  }
  double sum = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) sum += double(a[i]) * double(b[i]);
  acc += sum;
}

void sum_sq_accum_avx2(const float* a, std::size_t n, double& acc) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 av = _mm256_loadu_ps(a + i);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
    s0 = _mm256_fmadd_pd(lo, lo, s0);
    s1 = _mm256_fmadd_pd(hi, hi, s1);
  }
  double sum = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) sum += double(a[i]) * double(a[i]);
  acc += sum;
}

inline float sample_bilinear_ref(const float* src, int w, int h, double c, double r) {
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

// One 8-lane bilinear gather block at pixel offset x; out-of-bounds lanes
// produce 0. Requires w >= 2 and h >= 2.
inline __m256 gather_block(const float* src, int w, int h,
                           double c0, double r0, double dc, double dr, int x) {
  const __m256d steps_lo = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d steps_hi = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
  const __m256d xd = _mm256_set1_pd(double(x));
  const __m256d il = _mm256_add_pd(xd, steps_lo);
  const __m256d ih = _mm256_add_pd(xd, steps_hi);
  const __m256d cl = _mm256_fmadd_pd(il, _mm256_set1_pd(dc), _mm256_set1_pd(c0));
  const __m256d ch = _mm256_fmadd_pd(ih, _mm256_set1_pd(dc), _mm256_set1_pd(c0));
  const __m256d rl = _mm256_fmadd_pd(il, _mm256_set1_pd(dr), _mm256_set1_pd(r0));
  const __m256d rh = _mm256_fmadd_pd(ih, _mm256_set1_pd(dr), _mm256_set1_pd(r0));

  const __m256d zero = _mm256_setzero_pd();
  const __m256d cmax = _mm256_set1_pd(double(w - 1));
  const __m256d rmax = _mm256_set1_pd(double(h - 1));
  const __m256d in_lo = _mm256_and_pd(
      _mm256_and_pd(_mm256_cmp_pd(cl, zero, _CMP_GE_OQ), _mm256_cmp_pd(cl, cmax, _CMP_LE_OQ)),
      _mm256_and_pd(_mm256_cmp_pd(rl, zero, _CMP_GE_OQ), _mm256_cmp_pd(rl, rmax, _CMP_LE_OQ)));
  const __m256d in_hi = _mm256_and_pd(
      _mm256_and_pd(_mm256_cmp_pd(ch, zero, _CMP_GE_OQ), _mm256_cmp_pd(ch, cmax, _CMP_LE_OQ)),
      _mm256_and_pd(_mm256_cmp_pd(rh, zero, _CMP_GE_OQ), _mm256_cmp_pd(rh, rmax, _CMP_LE_OQ)));
  // Fold each 64-bit mask lane down to one 32-bit lane.
  const __m256i pick = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  const __m256i m_lo = _mm256_permutevar8x32_epi32(_mm256_castpd_si256(in_lo), pick);
  const __m256i m_hi = _mm256_permutevar8x32_epi32(_mm256_castpd_si256(in_hi), pick);
  const __m256i mask = _mm256_permute2x128_si256(m_lo, m_hi, 0x20);

  const __m256d fcl = _mm256_floor_pd(cl), fch = _mm256_floor_pd(ch);
  const __m256d frl = _mm256_floor_pd(rl), frh = _mm256_floor_pd(rh);
  const __m128 fx_lo = _mm256_cvtpd_ps(_mm256_sub_pd(cl, fcl));
  const __m128 fx_hi = _mm256_cvtpd_ps(_mm256_sub_pd(ch, fch));
  const __m128 fy_lo = _mm256_cvtpd_ps(_mm256_sub_pd(rl, frl));
  const __m128 fy_hi = _mm256_cvtpd_ps(_mm256_sub_pd(rh, frh));
  const __m256 fx = _mm256_insertf128_ps(_mm256_castps128_ps256(fx_lo), fx_hi, 1);
  const __m256 fy = _mm256_insertf128_ps(_mm256_castps128_ps256(fy_lo), fy_hi, 1);

  // Out-of-range floors (masked lanes) may convert to INT_MIN; their
  // indices are zeroed below before the gather touches memory.
  const __m256i icol = _mm256_set_m128i(_mm256_cvtpd_epi32(fch), _mm256_cvtpd_epi32(fcl));
  const __m256i irow = _mm256_set_m128i(_mm256_cvtpd_epi32(frh), _mm256_cvtpd_epi32(frl));

  __m256i idx = _mm256_add_epi32(_mm256_mullo_epi32(irow, _mm256_set1_epi32(w)), icol);
  idx = _mm256_and_si256(idx, mask);
  __m256i dcol = _mm256_and_si256(_mm256_cmpgt_epi32(_mm256_set1_epi32(w - 1), icol),
                                  _mm256_set1_epi32(1));
  __m256i drow = _mm256_and_si256(_mm256_cmpgt_epi32(_mm256_set1_epi32(h - 1), irow),
                                  _mm256_set1_epi32(w));
  dcol = _mm256_and_si256(dcol, mask);
  drow = _mm256_and_si256(drow, mask);

  const __m256 v00 = _mm256_i32gather_ps(src, idx, 4);
  const __m256 v01 = _mm256_i32gather_ps(src, _mm256_add_epi32(idx, dcol), 4);
  const __m256 v10 = _mm256_i32gather_ps(src, _mm256_add_epi32(idx, drow), 4);
  const __m256 v11 =
      _mm256_i32gather_ps(src, _mm256_add_epi32(idx, _mm256_add_epi32(dcol, drow)), 4);

  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 top = _mm256_fmadd_ps(v01, fx, _mm256_mul_ps(v00, _mm256_sub_ps(one, fx)));
  const __m256 bot = _mm256_fmadd_ps(v11, fx, _mm256_mul_ps(v10, _mm256_sub_ps(one, fx)));
  const __m256 v = _mm256_fmadd_ps(bot, fy, _mm256_mul_ps(top, _mm256_sub_ps(one, fy)));
  return _mm256_and_ps(v, _mm256_castsi256_ps(mask));
}

void bilinear_row_avx2(const float* src, int w, int h,
                       double c0, double r0, double dc, double dr,
                       int n, float* dst) {
  if (w < 2 || h < 2) {
    for (int i = 0; i < n; ++i)
      dst[i] = sample_bilinear_ref(src, w, h, c0 + i * dc, r0 + i * dr);
    return;
  }
  int x = 0;
  for (; x + 8 <= n; x += 8)
    _mm256_storeu_ps(dst + x, gather_block(src, w, h, c0, r0, dc, dr, x));
  for (; x < n; ++x) dst[x] = sample_bilinear_ref(src, w, h, c0 + x * dc, r0 + x * dr);
}

// Reciprocals of the fraction drifts, hoisted out of the per-run length
// computation (divisions dominate short runs otherwise).
struct RunStepInv {
  double inv_dcol_pos = 0.0;  // 1/(dc-1) when dc > 1
  double inv_dcol_neg = 0.0;  // 1/(1-dc) when dc < 1
  double inv_dr_pos = 0.0;
  double inv_dr_neg = 0.0;

  explicit RunStepInv(double dc, double dr) {
    const double dcol = dc - 1.0;
    if (dcol > 0.0) inv_dcol_pos = 1.0 / dcol;
    if (dcol < 0.0) inv_dcol_neg = 1.0 / -dcol;
    if (dr > 0.0) inv_dr_pos = 1.0 / dr;
    if (dr < 0.0) inv_dr_neg = 1.0 / -dr;
  }
};

// Length of the run starting at pixel x over which floor(row) stays fixed,
// floor(col) advances by exactly 1 per pixel, and the 2x2 stencil stays
// interior (col <= w-2, row <= h-2). The closed-form estimate is verified
// against exact per-pixel floors and shrunk if floating point disagrees.
inline int interior_run_length(int w, int h, double c0, double r0,
                               double dc, double dr, const RunStepInv& inv,
                               int x, int n) {
  const double c = c0 + x * dc, r = r0 + x * dr;
  if (!(c >= 0.0 && r >= 0.0 && c < double(w - 1) && r < double(h - 1))) return 0;
  const int ci = int(c), ri = int(r);

  double len = double(n - x);
  const double fc = c - ci, fr = r - ri;
  if (dc > 1.0) len = std::min(len, (1.0 - fc) * inv.inv_dcol_pos);
  else if (dc < 1.0) len = std::min(len, fc * inv.inv_dcol_neg + 1.0);
  if (dr > 0.0) len = std::min(len, (1.0 - fr) * inv.inv_dr_pos);
  else if (dr < 0.0) len = std::min(len, fr * inv.inv_dr_neg + 1.0);
  len = std::min(len, double(w - 1 - ci));  // keep ci + k <= w - 2

  int L = len >= double(n - x) ? (n - x) : int(len);
  while (L > 1) {
    const double ce = c0 + (x + L - 1) * dc, re = r0 + (x + L - 1) * dr;
    if (ce >= 0.0 && re >= 0.0 && re < double(h - 1) && int(re) == ri &&
        ce < double(w - 1) && int(ce) == ci + (L - 1))
      break;
    --L;
  }
  return L;
}

void bilinear_row_ncc_avx2(const float* src, int w, int h,
                           double c0, double r0, double dc, double dr,
                           const float* g, int n, double& gs, double& ss) {
  __m256d gs0 = _mm256_setzero_pd(), gs1 = _mm256_setzero_pd();
  __m256d ss0 = _mm256_setzero_pd(), ss1 = _mm256_setzero_pd();
  double gs_t = 0.0, ss_t = 0.0;
  const __m256 one = _mm256_set1_ps(1.0f);
  // Lane masks for partial tail blocks (first k lanes active).
  alignas(32) static const std::uint32_t kTail[8][8] = {
      {0, 0, 0, 0, 0, 0, 0, 0},
      {~0u, 0, 0, 0, 0, 0, 0, 0},
      {~0u, ~0u, 0, 0, 0, 0, 0, 0},
      {~0u, ~0u, ~0u, 0, 0, 0, 0, 0},
      {~0u, ~0u, ~0u, ~0u, 0, 0, 0, 0},
      {~0u, ~0u, ~0u, ~0u, ~0u, 0, 0, 0},
      {~0u, ~0u, ~0u, ~0u, ~0u, ~0u, 0, 0},
      {~0u, ~0u, ~0u, ~0u, ~0u, ~0u, ~0u, 0},
  };

  const auto accumulate_v = [&](__m256 v, const float* gp) {
    const __m256 gv = _mm256_loadu_ps(gp);
    const __m256 vm = _mm256_and_ps(v, _mm256_cmp_ps(gv, _mm256_setzero_ps(), _CMP_NEQ_OQ));
    const __m256d vlo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
    const __m256d vhi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
    const __m256d glo = _mm256_cvtps_pd(_mm256_castps256_ps128(gv));
    const __m256d ghi = _mm256_cvtps_pd(_mm256_extractf128_ps(gv, 1));
    const __m256d mlo = _mm256_cvtps_pd(_mm256_castps256_ps128(vm));
    const __m256d mhi = _mm256_cvtps_pd(_mm256_extractf128_ps(vm, 1));
    gs0 = _mm256_fmadd_pd(glo, vlo, gs0);
    gs1 = _mm256_fmadd_pd(ghi, vhi, gs1);
    ss0 = _mm256_fmadd_pd(mlo, mlo, ss0);
    ss1 = _mm256_fmadd_pd(mhi, mhi, ss1);
  };
  // Gather blocks where possible, reference samples otherwise.
  const auto general_segment = [&](int x0, int x1) {
    int x = x0;
    if (w >= 2 && h >= 2)
      for (; x + 8 <= x1 && x + 8 <= n; x += 8)
        accumulate_v(gather_block(src, w, h, c0, r0, dc, dr, x), g + x);
    for (; x < x1; ++x) {
      if (g[x] == 0.0f) continue;
      const double v = sample_bilinear_ref(src, w, h, c0 + x * dc, r0 + x * dr);
      gs_t += double(g[x]) * v;
      ss_t += v * v;
    }
  };

  // The contiguous fast path needs near-unit column stride and a gentle row
  // drift: |dr| <= 1/16 keeps every lane's row fraction within one crossing
  // of the rebased base row (rebase fires at most 15 lanes after the first
  // crossing), so the in-block blend only ever spans three source rows.
  const bool eligible = w >= 4 && h >= 4 && std::abs(dr) <= 0.0625 &&
                        std::abs(dc - 1.0) <= 0.02;
  if (!eligible) {
    general_segment(0, n);
    gs += hsum(_mm256_add_pd(gs0, gs1)) + gs_t;
    ss += hsum(_mm256_add_pd(ss0, ss1)) + ss_t;
    return;
  }

  // Interior pixel interval [xa, xb): c in [0, w-2], r in [1, h-3].
  // (dc is within 2% of 1, hence positive and increasing.)
  double lo = (0.0 - c0) / dc, hi = (double(w - 2) - c0) / dc;
  if (dr > 0.0) {
    lo = std::max(lo, (1.0 - r0) / dr);
    hi = std::min(hi, (double(h - 3) - r0) / dr);
  } else if (dr < 0.0) {
    lo = std::max(lo, (double(h - 3) - r0) / dr);
    hi = std::min(hi, (1.0 - r0) / dr);
  } else if (!(r0 >= 1.0 && r0 <= double(h - 3))) {
    hi = lo - 1.0;
  }
  int xa = int(std::max(0.0, std::ceil(lo)));
  int xb = int(std::min(double(n), std::floor(hi) + 1.0));
  const auto interior = [&](int x) {
    const double c = c0 + x * dc, r = r0 + x * dr;
    return c >= 0.0 && c <= double(w - 2) && r >= 1.0 && r <= double(h - 3);
  };
  while (xa < xb && !interior(xa)) ++xa;
  while (xb > xa && !interior(xb - 1)) --xb;

  general_segment(0, std::min(xa, n));

  const RunStepInv inv(dc, dr);
  const __m256d steps_lo = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d steps_hi = _mm256_set_pd(7.0, 6.0, 5.0, 4.0);
  const __m256d vdc = _mm256_set1_pd(dc), vdr = _mm256_set1_pd(dr);
  const __m256d vc0 = _mm256_set1_pd(c0), vr0 = _mm256_set1_pd(r0);
  const __m256d dfx = _mm256_set1_pd(8.0 * (dc - 1.0));
  const __m256d dfy = _mm256_set1_pd(8.0 * dr);
  const __m256d pd_one = _mm256_set1_pd(1.0);

  int x = xa;
  while (x < xb) {
    // Runs are limited only by column-stride slips and the interval end;
    // row crossings are handled inside the blocks.
    const double c = c0 + x * dc;
    const int ci = int(c);
    double len = double(xb - x);
    const double fc = c - ci;
    if (dc > 1.0) len = std::min(len, (1.0 - fc) * inv.inv_dcol_pos);
    else if (dc < 1.0) len = std::min(len, fc * inv.inv_dcol_neg + 1.0);
    len = std::min(len, double(w - 1 - ci));
    int L = len >= double(xb - x) ? (xb - x) : int(len);
    while (L > 1) {
      const double ce = c0 + (x + L - 1) * dc;
      if (ce < double(w - 1) && int(ce) == ci + (L - 1)) break;
      --L;
    }
    if (L < 8) {
      const int stop = std::min(xb, x + 8);
      general_segment(x, stop);
      x = stop;
      continue;
    }

    int rb = int(r0 + x * dr);  // interval keeps rb in [1, h-3]
    // Row pair selection per crossing direction: lanes with fy outside
    // [0,1) blend the adjacent row pair with fy shifted back by one.
    const float* q0;
    const float* q1;
    const float* q2;
    if (dr >= 0.0) {
      q0 = src + std::size_t(rb) * w + ci;
      q1 = q0 + w;
      q2 = q1 + w;
    } else {
      q0 = src + std::size_t(rb - 1) * w + ci;
      q1 = q0 + w;
      q2 = q1 + w;
      // crossings select the (q0, q1) pair
    }
    const bool drpos = dr >= 0.0;

    const __m256d xd = _mm256_set1_pd(double(x));
    const __m256d cid = _mm256_set1_pd(double(ci));
    const __m256d rid = _mm256_set1_pd(double(rb));
    __m256d fxl = _mm256_sub_pd(_mm256_fmadd_pd(_mm256_add_pd(xd, steps_lo), vdc, vc0),
                                _mm256_add_pd(cid, steps_lo));
    __m256d fxh = _mm256_sub_pd(_mm256_fmadd_pd(_mm256_add_pd(xd, steps_hi), vdc, vc0),
                                _mm256_add_pd(cid, steps_hi));
    __m256d fyl = _mm256_sub_pd(_mm256_fmadd_pd(_mm256_add_pd(xd, steps_lo), vdr, vr0), rid);
    __m256d fyh = _mm256_sub_pd(_mm256_fmadd_pd(_mm256_add_pd(xd, steps_hi), vdr, vr0), rid);

    const int full = L - (L % 8);
    const bool masked_tail_ok =
        (L % 8) != 0 && ci + L + 8 <= w - 1 && x + full + 8 <= n;
    const int blocks_px = masked_tail_ok ? L : full;

    int j = 0;
    while (j < blocks_px) {
      const int rem = blocks_px - j;
      const __m256 lane_mask =
          rem >= 8 ? _mm256_castsi256_ps(_mm256_set1_epi32(-1))
                   : _mm256_load_ps(reinterpret_cast<const float*>(kTail[rem]));
      const __m128 fx_lo = _mm256_cvtpd_ps(fxl);
      const __m128 fx_hi = _mm256_cvtpd_ps(fxh);
      const __m128 fy_lo = _mm256_cvtpd_ps(fyl);
      const __m128 fy_hi = _mm256_cvtpd_ps(fyh);
      const __m256 fx = _mm256_insertf128_ps(_mm256_castps128_ps256(fx_lo), fx_hi, 1);
      __m256 fy = _mm256_insertf128_ps(_mm256_castps128_ps256(fy_lo), fy_hi, 1);

      const __m256 crossed = drpos ? _mm256_cmp_ps(fy, one, _CMP_GE_OQ)
                                   : _mm256_cmp_ps(fy, _mm256_setzero_ps(), _CMP_LT_OQ);
      const float* base_u = drpos ? q0 : q1;
      __m256 a0, a1, b0, b1;
      if (_mm256_movemask_ps(crossed) == 0) {
        a0 = _mm256_loadu_ps(base_u + j);
        a1 = _mm256_loadu_ps(base_u + j + 1);
        b0 = _mm256_loadu_ps(base_u + w + j);
        b1 = _mm256_loadu_ps(base_u + w + j + 1);
      } else {
        const __m256 r0v = _mm256_loadu_ps(q0 + j);
        const __m256 r0s = _mm256_loadu_ps(q0 + j + 1);
        const __m256 r1v = _mm256_loadu_ps(q1 + j);
        const __m256 r1s = _mm256_loadu_ps(q1 + j + 1);
        const __m256 r2v = _mm256_loadu_ps(q2 + j);
        const __m256 r2s = _mm256_loadu_ps(q2 + j + 1);
        if (drpos) {
          a0 = _mm256_blendv_ps(r0v, r1v, crossed);
          a1 = _mm256_blendv_ps(r0s, r1s, crossed);
          b0 = _mm256_blendv_ps(r1v, r2v, crossed);
          b1 = _mm256_blendv_ps(r1s, r2s, crossed);
          fy = _mm256_sub_ps(fy, _mm256_and_ps(crossed, one));
        } else {
          a0 = _mm256_blendv_ps(r1v, r0v, crossed);
          a1 = _mm256_blendv_ps(r1s, r0s, crossed);
          b0 = _mm256_blendv_ps(r2v, r1v, crossed);
          b1 = _mm256_blendv_ps(r2s, r1s, crossed);
          fy = _mm256_add_ps(fy, _mm256_and_ps(crossed, one));
        }
      }

      const __m256 ifx = _mm256_sub_ps(one, fx);
      const __m256 top = _mm256_fmadd_ps(a1, fx, _mm256_mul_ps(a0, ifx));
      const __m256 bot = _mm256_fmadd_ps(b1, fx, _mm256_mul_ps(b0, ifx));
      __m256 v = _mm256_fmadd_ps(bot, fy, _mm256_mul_ps(top, _mm256_sub_ps(one, fy)));
      v = _mm256_and_ps(v, lane_mask);
      accumulate_v(v, g + x + j);

      fxl = _mm256_add_pd(fxl, dfx);
      fxh = _mm256_add_pd(fxh, dfx);
      fyl = _mm256_add_pd(fyl, dfy);
      fyh = _mm256_add_pd(fyh, dfy);

      // Rebase once every lane has crossed, keeping fy within [-1, 2).
      if (_mm256_movemask_ps(crossed) == 0xFF) {
        if (drpos) {
          fyl = _mm256_sub_pd(fyl, pd_one);
          fyh = _mm256_sub_pd(fyh, pd_one);
          ++rb;
          q0 = q1;
          q1 = q2;
          q2 = q2 + w;
        } else {
          fyl = _mm256_add_pd(fyl, pd_one);
          fyh = _mm256_add_pd(fyh, pd_one);
          --rb;
          q2 = q1;
          q1 = q0;
          q0 = q0 - w;
        }
      }
      j += 8;
    }
    for (j = blocks_px; j < L; ++j) {
      if (g[x + j] == 0.0f) continue;
      const double v = sample_bilinear_ref(src, w, h, c0 + (x + j) * dc, r0 + (x + j) * dr);
      gs_t += double(g[x + j]) * v;
      ss_t += v * v;
    }
    x += L;
  }

  general_segment(std::max(xb, xa), n);

  gs += hsum(_mm256_add_pd(gs0, gs1)) + gs_t;
  ss += hsum(_mm256_add_pd(ss0, ss1)) + ss_t;
}

template <int K>
void cosine_max_map_fixed(const float* const* planes, int dim,
                          const float* protos, float* out, std::uint8_t* holes,
                          std::size_t n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 eps = _mm256_set1_ps(1e-12f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc[K];
    for (int k = 0; k < K; ++k) acc[k] = _mm256_setzero_ps();
    __m256 norm = _mm256_setzero_ps();
    for (int d = 0; d < dim; ++d) {
      const __m256 f = _mm256_loadu_ps(planes[d] + i);
      norm = _mm256_fmadd_ps(f, f, norm);
      for (int k = 0; k < K; ++k)
        acc[k] = _mm256_fmadd_ps(f, _mm256_broadcast_ss(protos + std::size_t(k) * dim + d),
                                 acc[k]);
    }
    __m256 best = _mm256_setzero_ps();
    for (int k = 0; k < K; ++k) best = _mm256_max_ps(best, acc[k]);
    const __m256 valid = _mm256_cmp_ps(norm, eps, _CMP_GE_OQ);
    __m256 v = _mm256_div_ps(best, _mm256_sqrt_ps(_mm256_max_ps(norm, eps)));
    v = _mm256_min_ps(v, one);
    v = _mm256_and_ps(v, valid);
    _mm256_storeu_ps(out + i, v);
    if (holes) {
      const int bits = _mm256_movemask_ps(valid);
      for (int k = 0; k < 8; ++k) holes[i + k] = (bits >> k & 1) ? 0 : 1;
    }
  }
  for (; i < n; ++i) {
    float norm_sq = 0.0f;
    for (int d = 0; d < dim; ++d) norm_sq += planes[d][i] * planes[d][i];
    const bool hole = norm_sq < 1e-12f;
    if (holes) holes[i] = hole ? 1 : 0;
    if (hole) {
      out[i] = 0.0f;
      continue;
    }
    float best = 0.0f;
    for (int k = 0; k < K; ++k) {
      const float* p = protos + std::size_t(k) * dim;
      float dot = 0.0f;
      for (int d = 0; d < dim; ++d) dot += p[d] * planes[d][i];
      if (dot > best) best = dot;
    }
    float v = best / std::sqrt(norm_sq);
    if (v > 1.0f) v = 1.0f;
    out[i] = v;
  }
}

void bin_points_avx2(const float* xs, const float* ys, std::size_t n,
                     float a_col, float b_col, float a_row, float b_row,
                     float ce, float cn, float cc, int size, int* cols, int* rows) {
  const __m256 vac = _mm256_set1_ps(a_col), vbc = _mm256_set1_ps(b_col);
  const __m256 var = _mm256_set1_ps(a_row), vbr = _mm256_set1_ps(b_row);
  const __m256 vce = _mm256_set1_ps(ce), vcn = _mm256_set1_ps(cn);
  const __m256 vcc = _mm256_set1_ps(cc), half = _mm256_set1_ps(0.5f);
  const __m256i vsize = _mm256_set1_epi32(size);
  const __m256i minus1 = _mm256_set1_epi32(-1);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 dx = _mm256_sub_ps(_mm256_loadu_ps(xs + i), vce);
    const __m256 dy = _mm256_sub_ps(_mm256_loadu_ps(ys + i), vcn);
    const __m256 u = _mm256_fmadd_ps(vac, dx, _mm256_fmadd_ps(vbc, dy, vcc));
    const __m256 v = _mm256_fmadd_ps(var, dx, _mm256_fmadd_ps(vbr, dy, vcc));
    const __m256i col = _mm256_cvtps_epi32(_mm256_floor_ps(_mm256_add_ps(u, half)));
    const __m256i row = _mm256_cvtps_epi32(_mm256_floor_ps(_mm256_add_ps(v, half)));
    // ok = 0 <= col < size && 0 <= row < size (signed compares)
    const __m256i bad = _mm256_or_si256(
        _mm256_or_si256(_mm256_cmpgt_epi32(_mm256_setzero_si256(), col),
                        _mm256_cmpgt_epi32(_mm256_setzero_si256(), row)),
        _mm256_or_si256(_mm256_cmpgt_epi32(col, _mm256_add_epi32(vsize, minus1)),
                        _mm256_cmpgt_epi32(row, _mm256_add_epi32(vsize, minus1))));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(cols + i),
                        _mm256_blendv_epi8(col, minus1, bad));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(rows + i), row);
  }
  for (; i < n; ++i) {
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

void cosine_max_map_avx2(const float* const* planes, int dim,
                         const float* protos, int num_protos,
                         float* out, std::uint8_t* holes, std::size_t n) {
  switch (num_protos) {
    case 1: return cosine_max_map_fixed<1>(planes, dim, protos, out, holes, n);
    case 2: return cosine_max_map_fixed<2>(planes, dim, protos, out, holes, n);
    case 3: return cosine_max_map_fixed<3>(planes, dim, protos, out, holes, n);
    case 4: return cosine_max_map_fixed<4>(planes, dim, protos, out, holes, n);
    case 5: return cosine_max_map_fixed<5>(planes, dim, protos, out, holes, n);
    case 6: return cosine_max_map_fixed<6>(planes, dim, protos, out, holes, n);
    default: return scalar().cosine_max_map(planes, dim, protos, num_protos, out, holes, n);
  }
}

}  // namespace

const Backend& avx2() {
  static const Backend backend{
      "avx2",           ncc_sums_avx2,        masked_ncc_sums_avx2,
      dot_accum_avx2,
      sum_sq_accum_avx2, bilinear_row_avx2,   bilinear_row_ncc_avx2,
      cosine_max_map_avx2, bin_points_avx2,
  };
  return backend;
}

}  // namespace similoc::kernels
