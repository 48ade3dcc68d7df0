#include <cmath>
#include <vector>

#include "doctest.h"
#include "similoc/kernels/kernels.hpp"
#include "similoc/rng.hpp"

using namespace similoc;

namespace {

std::vector<float> random_values(std::size_t n, Rng& rng, float lo = 0.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = float(rng.uniform(lo, hi));
  return v;
}

}  // namespace

TEST_CASE("backend listing always contains scalar") {
  const auto backends = kernels::available();
  REQUIRE(!backends.empty());
  CHECK(std::string(backends.front()->name) == "scalar");
}

TEST_CASE("sum kernels agree across backends") {
  Rng rng(101);
  for (std::size_t n : {0ul, 1ul, 7ul, 8ul, 63ul, 1000ul, 4096ul}) {
    const auto a = random_values(n, rng, -1.0f, 1.0f);
    const auto b = random_values(n, rng, -1.0f, 1.0f);
    double ref_gs = 0, ref_gg = 0, ref_ss = 0;
    kernels::scalar().ncc_sums(a.data(), b.data(), n, ref_gs, ref_gg, ref_ss);
    for (const auto* backend : kernels::available()) {
      double gs = 0, gg = 0, ss = 0;
      backend->ncc_sums(a.data(), b.data(), n, gs, gg, ss);
      CHECK(gs == doctest::Approx(ref_gs).epsilon(1e-12));
      CHECK(gg == doctest::Approx(ref_gg).epsilon(1e-12));
      CHECK(ss == doctest::Approx(ref_ss).epsilon(1e-12));

      double dot = 0;
      backend->dot_accum(a.data(), b.data(), n, dot);
      CHECK(dot == doctest::Approx(ref_gs).epsilon(1e-12));
      double sq = 0;
      backend->sum_sq_accum(a.data(), n, sq);
      CHECK(sq == doctest::Approx(ref_gg).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilinear_row backends agree on random affine sweeps") {
  Rng rng(202);
  const int w = 97, h = 83;
  const auto img = random_values(std::size_t(w) * h, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const double c0 = rng.uniform(-10.0, w + 10.0);
    const double r0 = rng.uniform(-10.0, h + 10.0);
    const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979);
    const double dc = std::cos(angle), dr = std::sin(angle);
    const int n = 64;
    std::vector<float> ref(n), got(n);
    kernels::scalar().bilinear_row(img.data(), w, h, c0, r0, dc, dr, n, ref.data());
    for (const auto* backend : kernels::available()) {
      backend->bilinear_row(img.data(), w, h, c0, r0, dc, dr, n, got.data());
      for (int i = 0; i < n; ++i)
        CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("bilinear_row is exact at integer coordinates") {
  Rng rng(303);
  const int w = 31, h = 17;
  const auto img = random_values(std::size_t(w) * h, rng);
  for (const auto* backend : kernels::available()) {
    std::vector<float> out(w);
    backend->bilinear_row(img.data(), w, h, 0.0, 5.0, 1.0, 0.0, w, out.data());
    for (int c = 0; c < w; ++c) CHECK(out[c] == img[5 * w + c]);
  }
}

TEST_CASE("bilinear_row zero outside bounds") {
  Rng rng(404);
  const int w = 16, h = 16;
  const auto img = random_values(std::size_t(w) * h, rng, 0.5f, 1.0f);
  for (const auto* backend : kernels::available()) {
    std::vector<float> out(8);
    backend->bilinear_row(img.data(), w, h, -30.0, 2.0, 1.0, 0.0, 8, out.data());
    for (float v : out) CHECK(v == 0.0f);
    backend->bilinear_row(img.data(), w, h, 2.0, double(h - 1) + 0.001, 1.0, 0.0, 8,
                          out.data());
    for (float v : out) CHECK(v == 0.0f);
  }
}

TEST_CASE("fused bilinear_row_ncc equals sample-then-accumulate") {
  Rng rng(505);
  const int w = 120, h = 110;
  const auto img = random_values(std::size_t(w) * h, rng);
  for (int trial = 0; trial < 60; ++trial) {
    // Sweep small rotations (fast-run path) and arbitrary ones (gather path).
    const double angle = trial < 30 ? rng.uniform(-0.05, 0.05)
                                    : rng.uniform(0.0, 2.0 * 3.14159265358979);
    const double dc = std::cos(angle), dr = std::sin(angle);
    const double c0 = rng.uniform(-5.0, w - 20.0);
    const double r0 = rng.uniform(-5.0, h - 20.0);
    const int n = 96;
    auto g = random_values(n, rng);
    for (int i = 0; i < n; i += 5) g[i] = 0.0f;

    std::vector<float> sampled(n);
    kernels::scalar().bilinear_row(img.data(), w, h, c0, r0, dc, dr, n, sampled.data());
    double want_gs = 0, want_ss = 0;
    for (int i = 0; i < n; ++i) {
      want_gs += double(g[i]) * sampled[i];
      if (g[i] != 0.0f) want_ss += double(sampled[i]) * sampled[i];
    }

    for (const auto* backend : kernels::available()) {
      double gs = 0, ss = 0;
      backend->bilinear_row_ncc(img.data(), w, h, c0, r0, dc, dr, g.data(), n, gs, ss);
      CHECK(gs == doctest::Approx(want_gs).epsilon(1e-6).scale(1.0));
      CHECK(ss == doctest::Approx(want_ss).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("cosine_max_map backends agree and clamp") {
  Rng rng(606);
  const int dim = 11, K = 4;
  const std::size_t n = 1000;
  std::vector<std::vector<float>> planes_data(dim);
  std::vector<const float*> planes(dim);
  for (int d = 0; d < dim; ++d) {
    planes_data[d] = random_values(n, rng, -1.0f, 1.0f);
    planes[d] = planes_data[d].data();
  }
  // A few zero-feature pixels.
  for (std::size_t i = 0; i < n; i += 97)
    for (int d = 0; d < dim; ++d) planes_data[d][i] = 0.0f;

  std::vector<float> protos(std::size_t(K) * dim);
  for (int k = 0; k < K; ++k) {
    double norm = 0.0;
    for (int d = 0; d < dim; ++d) {
      protos[k * dim + d] = float(rng.uniform(-1.0, 1.0));
      norm += double(protos[k * dim + d]) * protos[k * dim + d];
    }
    norm = std::sqrt(norm);
    for (int d = 0; d < dim; ++d) protos[k * dim + d] = float(protos[k * dim + d] / norm);
  }

  std::vector<float> ref(n), got(n);
  std::vector<std::uint8_t> ref_holes(n), got_holes(n);
  kernels::scalar().cosine_max_map(planes.data(), dim, protos.data(), K, ref.data(), ref_holes.data(), n);
  for (std::size_t i = 0; i < n; i += 97) { CHECK(ref[i] == 0.0f); CHECK(ref_holes[i] == 1); }
  for (float v : ref) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  for (const auto* backend : kernels::available()) {
    backend->cosine_max_map(planes.data(), dim, protos.data(), K, got.data(),
                            got_holes.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-6).scale(1.0));
      CHECK(got_holes[i] == ref_holes[i]);
    }
  }
}
