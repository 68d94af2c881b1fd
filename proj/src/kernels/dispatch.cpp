#include <atomic>
#include <cstdlib>
#include <string>

#include "sinkmatch/error.hpp"
#include "sinkmatch/kernels.hpp"

namespace sinkmatch::kernels {

#ifdef SINKMATCH_HAVE_AVX2
const Backend* avx2_backend_impl();
#endif
#ifdef SINKMATCH_HAVE_NEON
const Backend* neon_backend_impl();
#endif

const Backend* avx2_backend() {
#ifdef SINKMATCH_HAVE_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_backend_impl();
#endif
  return nullptr;
}

const Backend* neon_backend() {
#ifdef SINKMATCH_HAVE_NEON
  return neon_backend_impl();  // baseline on aarch64
#else
  return nullptr;
#endif
}

namespace {

const Backend* by_name(std::string_view name) {
  if (name == "scalar") return &scalar_backend();
  if (name == "avx2") return avx2_backend();
  if (name == "neon") return neon_backend();
  return nullptr;
}

const Backend* pick_default() {
  if (const char* env = std::getenv("SINKMATCH_KERNELS")) {
    const Backend* b = by_name(env);
    if (!b)
      raise(errc::invalid_input,
            std::string("SINKMATCH_KERNELS=") + env + " is unknown or unavailable");
    return b;
  }
  if (const Backend* b = avx2_backend()) return b;
  if (const Backend* b = neon_backend()) return b;
  return &scalar_backend();
}

std::atomic<const Backend*>& active_slot() {
  static std::atomic<const Backend*> slot{pick_default()};
  return slot;
}

}  // namespace

const Backend& active() { return *active_slot().load(std::memory_order_relaxed); }

void select(std::string_view name) {
  const Backend* b = by_name(name);
  if (!b) raise(errc::invalid_input, "kernel backend unknown or unavailable: " + std::string(name));
  active_slot().store(b, std::memory_order_relaxed);
}

}  // namespace sinkmatch::kernels
