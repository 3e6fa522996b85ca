#pragma once

#include <cstddef>

namespace dtsurv::kernels {

// Vectorizable numeric kernels behind the fitting hot loops. Every entry has a
// scalar reference implementation and, on x86-64 with AVX2+FMA, a SIMD variant
// selected once at startup. The two variants are equivalence-tested against
// each other; everything above this layer is kernel-agnostic.
//
// Conventions:
//   - exp_array flushes to 0 below x = -708 (instead of producing subnormals)
//     and saturates to +inf above x = 709.8, in both variants.
//   - expit_array clamps results into [DBL_MIN, 1 - 2^-53] so downstream code
//     can rely on hazards lying strictly inside (0, 1).
struct Ops {
  const char* name;

  // out[i] = exp(x[i])
  void (*exp_array)(const double* x, double* out, std::size_t n);

  // out[i] = 1 / (1 + exp(-x[i])), clamped into (0, 1)
  void (*expit_array)(const double* x, double* out, std::size_t n);

  // sum_i expit(shift + s[i])
  double (*sum_expit_shift)(double shift, const double* s, std::size_t n);

  // sum_i [ y[i] * eta[i] - softplus(eta[i]) ], softplus(x) = log(1 + exp(x)).
  // Bernoulli log-likelihood evaluated from linear predictors.
  double (*bernoulli_loglik)(const double* eta, const double* y, std::size_t n);

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // Lower-triangular symmetric rank-1 update:
  //   h[i*ldh + j] += w * x[i] * x[j]  for all 0 <= j <= i < q
  void (*syr_lower)(double w, const double* x, std::size_t q, double* h, std::size_t ldh);
};

// Kernel set for the current process. Picks the AVX2 variant when the CPU
// supports it; the DTSURV_KERNELS environment variable ("scalar" or "avx2",
// read once) overrides the automatic choice.
const Ops& active();

// Scalar reference kernels, always available.
const Ops& scalar_ops();

// AVX2 kernels, or nullptr when unsupported by the build or the CPU.
const Ops* avx2_ops();

// Numerically stable scalar expit with the same clamping contract as
// Ops::expit_array. Shared by the model layer and the scalar kernels.
double expit(double x);

}  // namespace dtsurv::kernels
