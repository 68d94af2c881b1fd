// Reference kernels. Plain loops, one accumulator; the SIMD backends are
// checked against these.

#include "sinkmatch/kernels.hpp"

namespace sinkmatch::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double sum_sq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void scale(double* x, std::size_t n, double s) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

void vmul(double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= y[i];
}

void vadd(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void vmax(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > acc[i]) acc[i] = x[i];
}

void axpy(double* acc, const double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += s * x[i];
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{"scalar", dot, sum, max, sum_sq, sum_sq_diff,
                               scale,    vmul, vadd, vmax, axpy};
  return backend;
}

}  // namespace sinkmatch::kernels
