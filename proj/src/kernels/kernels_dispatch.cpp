#include <cstdio>
#include <cstdlib>
#include <string>

#include "dyncal/kernels.hpp"

namespace dyncal {

namespace {

bool cpu_supports(KernelIsa isa) {
  switch (isa) {
    case KernelIsa::kScalar:
      return true;
    case KernelIsa::kAvx2:
#if defined(DYNCAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case KernelIsa::kNeon:
#if defined(DYNCAL_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() {
  if (const char* forced = std::getenv("DYNCAL_KERNELS")) {
    const std::string name(forced);
    for (KernelIsa isa : {KernelIsa::kScalar, KernelIsa::kAvx2, KernelIsa::kNeon}) {
      if (name == to_string(isa)) {
        if (const KernelTable* t = kernels_for(isa)) return *t;
        std::fprintf(stderr, "DYNCAL_KERNELS=%s unavailable on this CPU; using auto selection\n",
                     forced);
      }
    }
  }
  for (KernelIsa isa : {KernelIsa::kAvx2, KernelIsa::kNeon})
    if (const KernelTable* t = kernels_for(isa)) return *t;
  return detail::scalar_kernels();
}

}  // namespace

std::string_view to_string(KernelIsa isa) {
  switch (isa) {
    case KernelIsa::kScalar:
      return "scalar";
    case KernelIsa::kAvx2:
      return "avx2";
    case KernelIsa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* kernels_for(KernelIsa isa) {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case KernelIsa::kScalar:
      return &detail::scalar_kernels();
    case KernelIsa::kAvx2:
#if defined(DYNCAL_HAVE_AVX2)
      return &detail::avx2_kernels();
#else
      return nullptr;
#endif
    case KernelIsa::kNeon:
#if defined(DYNCAL_HAVE_NEON)
      return &detail::neon_kernels();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& kernels() {
  static const KernelTable& chosen = select();
  return chosen;
}

std::vector<KernelIsa> available_kernel_isas() {
  std::vector<KernelIsa> out;
  for (KernelIsa isa : {KernelIsa::kScalar, KernelIsa::kAvx2, KernelIsa::kNeon})
    if (kernels_for(isa)) out.push_back(isa);
  return out;
}

}  // namespace dyncal
