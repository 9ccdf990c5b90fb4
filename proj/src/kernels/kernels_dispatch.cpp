#include "bikecast/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace bikecast::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

namespace {

const Ops* resolve(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &scalar_ops();
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (__builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
      return nullptr;
    case Backend::neon:
#if defined(__aarch64__)
      return &neon_ops();  // baseline on aarch64
#endif
      return nullptr;
  }
  return nullptr;
}

const Ops* g_active = nullptr;

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

bool backend_available(Backend b) { return resolve(b) != nullptr; }

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (backend_available(b)) out.push_back(b);
  return out;
}

bool select(Backend b) {
  const Ops* ops = resolve(b);
  if (!ops) return false;
  g_active = ops;
  return true;
}

void select_auto() {
  if (const char* env = std::getenv("BIKECAST_SIMD")) {
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (std::strcmp(env, backend_name(b)) == 0 && select(b)) return;
    }
  }
  if (select(Backend::avx2)) return;
  if (select(Backend::neon)) return;
  select(Backend::scalar);
}

const Ops& active() {
  if (!g_active) select_auto();
  return *g_active;
}

}  // namespace bikecast::kernels
