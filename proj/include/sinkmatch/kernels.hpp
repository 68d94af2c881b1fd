#pragma once

#include <cstddef>
#include <string_view>

namespace sinkmatch::kernels {

/// Table of the arithmetic inner-loop kernels shared by the solvers.
///
/// Backends differ only in instruction selection (scalar reference, AVX2,
/// NEON); results must agree with the scalar reference up to summation
/// reassociation. Transcendental work (exp/log) stays in shared scalar code
/// so every backend evaluates the exact same Gibbs kernels.
struct Backend {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);  // n >= 1
  double (*sum_sq)(const double* x, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  void (*scale)(double* x, std::size_t n, double s);   // x *= s
  void (*vmul)(double* x, const double* y, std::size_t n);   // x[i] *= y[i]
  void (*vadd)(double* acc, const double* x, std::size_t n); // acc[i] += x[i]
  void (*vmax)(double* acc, const double* x, std::size_t n); // acc[i] = max(acc[i], x[i])
  void (*axpy)(double* acc, const double* x, double s, std::size_t n);  // acc[i] += s*x[i]
};

const Backend& scalar_backend();

/// Null when the backend was not compiled in or the CPU lacks support.
const Backend* avx2_backend();
const Backend* neon_backend();

/// Backend used by the library. Picked once from the best CPU match, or from
/// the SINKMATCH_KERNELS environment variable ("scalar", "avx2", "neon").
const Backend& active();

/// Force a backend by name. Not synchronized against in-flight solves.
void select(std::string_view name);

}  // namespace sinkmatch::kernels
