// AArch64 NEON variant. Advanced SIMD is mandatory on AArch64, so no runtime
// check is needed beyond the build-time architecture test.

#include <arm_neon.h>

#include <cmath>

#include "dyncal/kernels.hpp"

namespace dyncal::detail {

namespace {

float dot(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
  float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add(const float* x, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

float sum(const float* x, std::size_t n) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vaddq_f32(acc, vld1q_f32(x + i));
  float total = vaddvq_f32(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

void linear(const float* x, std::size_t rows, std::size_t in, const float* w, const float* b,
            std::size_t out, float* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = x + r * in;
    float* yr = y + r * out;
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
      const float* w0 = w + o * in;
      const float* w1 = w0 + in;
      const float* w2 = w1 + in;
      const float* w3 = w2 + in;
      float32x4_t a0 = vdupq_n_f32(0.0f), a1 = vdupq_n_f32(0.0f);
      float32x4_t a2 = vdupq_n_f32(0.0f), a3 = vdupq_n_f32(0.0f);
      std::size_t i = 0;
      for (; i + 4 <= in; i += 4) {
        const float32x4_t xv = vld1q_f32(xr + i);
        a0 = vfmaq_f32(a0, xv, vld1q_f32(w0 + i));
        a1 = vfmaq_f32(a1, xv, vld1q_f32(w1 + i));
        a2 = vfmaq_f32(a2, xv, vld1q_f32(w2 + i));
        a3 = vfmaq_f32(a3, xv, vld1q_f32(w3 + i));
      }
      float s0 = vaddvq_f32(a0), s1 = vaddvq_f32(a1), s2 = vaddvq_f32(a2), s3 = vaddvq_f32(a3);
      for (; i < in; ++i) {
        s0 += xr[i] * w0[i];
        s1 += xr[i] * w1[i];
        s2 += xr[i] * w2[i];
        s3 += xr[i] * w3[i];
      }
      yr[o] = s0 + (b ? b[o] : 0.0f);
      yr[o + 1] = s1 + (b ? b[o + 1] : 0.0f);
      yr[o + 2] = s2 + (b ? b[o + 2] : 0.0f);
      yr[o + 3] = s3 + (b ? b[o + 3] : 0.0f);
    }
    for (; o < out; ++o) yr[o] = (b ? b[o] : 0.0f) + dot(xr, w + o * in, in);
  }
}

void layernorm(const float* x, const float* gamma, const float* beta, float* y, std::size_t n,
               float eps) {
  const float mean = sum(x, n) / static_cast<float>(n);
  const float32x4_t vm = vdupq_n_f32(mean);
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t d = vsubq_f32(vld1q_f32(x + i), vm);
    acc = vfmaq_f32(acc, d, d);
  }
  float var = vaddvq_f32(acc);
  for (; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<float>(n);
  const float inv = 1.0f / std::sqrt(var + eps);
  const float32x4_t vi = vdupq_n_f32(inv);
  for (i = 0; i + 4 <= n; i += 4) {
    const float32x4_t d = vmulq_f32(vsubq_f32(vld1q_f32(x + i), vm), vi);
    vst1q_f32(y + i, vfmaq_f32(vld1q_f32(beta + i), d, vld1q_f32(gamma + i)));
  }
  for (; i < n; ++i) y[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
}

void softmax(float* x, std::size_t n) {
  float mx = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    float32x4_t vm = vld1q_f32(x);
    for (i = 4; i + 4 <= n; i += 4) vm = vmaxq_f32(vm, vld1q_f32(x + i));
    mx = vmaxvq_f32(vm);
  }
  for (; i < n; ++i) mx = x[i] > mx ? x[i] : mx;
  for (i = 0; i < n; ++i) x[i] = std::exp(x[i] - mx);
  const float inv = 1.0f / sum(x, n);
  const float32x4_t vi = vdupq_n_f32(inv);
  for (i = 0; i + 4 <= n; i += 4) vst1q_f32(x + i, vmulq_f32(vld1q_f32(x + i), vi));
  for (; i < n; ++i) x[i] *= inv;
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{KernelIsa::kNeon, dot, axpy, add, sum, linear, layernorm, softmax};
  return table;
}

}  // namespace dyncal::detail
