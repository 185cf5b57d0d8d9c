#include "nsp/error.hpp"
#include "nsp/simd/kernels.hpp"

#include <string>

namespace nsp::simd {

#if !defined(NSP_HAVE_AVX2)
const KernelTable* avx2_kernels() noexcept { return nullptr; }
#endif

#if !defined(NSP_HAVE_NEON)
const KernelTable* neon_kernels() noexcept { return nullptr; }
#endif

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(NSP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(NSP_HAVE_NEON)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error("SIMD variant '" + std::string(isa_name(isa)) +
                "' is not available on this machine");
  }
  switch (isa) {
    case Isa::avx2: return *avx2_kernels();
    case Isa::neon: return *neon_kernels();
    case Isa::scalar: break;
  }
  return scalar_kernels();
}

const KernelTable& active() noexcept {
  static const KernelTable& table = []() -> const KernelTable& {
    if (isa_supported(Isa::avx2)) return *avx2_kernels();
    if (isa_supported(Isa::neon)) return *neon_kernels();
    return scalar_kernels();
  }();
  return table;
}

}  // namespace nsp::simd
