#pragma once

// Single-precision inner loops of the transformer forward pass.
//
// Every kernel has a scalar reference implementation; vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are compiled when the target allows
// and selected at runtime from CPU features. Set DYNCAL_KERNELS=scalar|avx2|neon
// to force a variant. Variants differ only in summation order.

#include <cstddef>
#include <string_view>
#include <vector>

namespace dyncal {

enum class KernelIsa { kScalar, kAvx2, kNeon };

std::string_view to_string(KernelIsa isa);

struct KernelTable {
  KernelIsa isa;

  float (*dot)(const float* a, const float* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  /// y += x
  void (*add)(const float* x, float* y, std::size_t n);
  float (*sum)(const float* x, std::size_t n);
  /// y[r, o] = b[o] + sum_i x[r, i] * w[o, i]; x is rows x in, w is out x in
  /// (row-major); b may be null.
  void (*linear)(const float* x, std::size_t rows, std::size_t in, const float* w, const float* b,
                 std::size_t out, float* y);
  /// Normalises x over n entries (biased variance) then applies gamma, beta.
  void (*layernorm)(const float* x, const float* gamma, const float* beta, float* y,
                    std::size_t n, float eps);
  /// In-place numerically stable softmax.
  void (*softmax)(float* x, std::size_t n);
};

/// The variant chosen for this process (first call decides).
const KernelTable& kernels();

/// A specific variant, or nullptr when it is not compiled in or the CPU
/// lacks the required features.
const KernelTable* kernels_for(KernelIsa isa);

std::vector<KernelIsa> available_kernel_isas();

namespace detail {
const KernelTable& scalar_kernels();
#if defined(DYNCAL_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(DYNCAL_HAVE_NEON)
const KernelTable& neon_kernels();
#endif
}  // namespace detail

}  // namespace dyncal
