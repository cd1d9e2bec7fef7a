#include <cmath>

#include "dyncal/kernels.hpp"

namespace dyncal::detail {

namespace {

float dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

float sum(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void linear(const float* x, std::size_t rows, std::size_t in, const float* w, const float* b,
            std::size_t out, float* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = x + r * in;
    float* yr = y + r * out;
    for (std::size_t o = 0; o < out; ++o) yr[o] = (b ? b[o] : 0.0f) + dot(xr, w + o * in, in);
  }
}

void layernorm(const float* x, const float* gamma, const float* beta, float* y, std::size_t n,
               float eps) {
  const float mean = sum(x, n) / static_cast<float>(n);
  float var = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    const float d = x[i] - mean;
    var += d * d;
  }
  var /= static_cast<float>(n);
  const float inv = 1.0f / std::sqrt(var + eps);
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
}

void softmax(float* x, std::size_t n) {
  float mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = x[i] > mx ? x[i] : mx;
  float total = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - mx);
    total += x[i];
  }
  const float inv = 1.0f / total;
  for (std::size_t i = 0; i < n; ++i) x[i] *= inv;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{KernelIsa::kScalar, dot, axpy, add, sum, linear, layernorm, softmax};
  return table;
}

}  // namespace dyncal::detail
