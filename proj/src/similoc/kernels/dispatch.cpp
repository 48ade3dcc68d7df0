#include <cstdlib>
#include <stdexcept>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "similoc/kernels/kernels.hpp"

namespace similoc::kernels {
namespace {

// Large raster buffers churn every frame; keeping them on the heap instead
// of fresh mmaps avoids refaulting megabytes per allocation.
[[maybe_unused]] const bool g_malloc_tuned = [] {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 64 << 20);
#endif
  return true;
}();

const Backend* pick_initial() {
#if defined(SIMILOC_HAVE_AVX2)
  if (const char* env = std::getenv("SIMILOC_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return &scalar();
    if (want != "avx2") return nullptr;  // unknown value -> default selection
  }
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2();
#endif
  return &scalar();
}

const Backend*& active_slot() {
  static const Backend* slot = [] {
    const Backend* b = pick_initial();
    return b ? b : &scalar();
  }();
  return slot;
}

}  // namespace

const Backend& active() { return *active_slot(); }

void set_active(const std::string& name) {
  for (const Backend* b : available()) {
    if (name == b->name) {
      active_slot() = b;
      return;
    }
  }
  throw std::invalid_argument("unknown kernel backend: " + name);
}

std::vector<const Backend*> available() {
  std::vector<const Backend*> out{&scalar()};
#if defined(SIMILOC_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(&avx2());
#endif
  return out;
}

}  // namespace similoc::kernels
