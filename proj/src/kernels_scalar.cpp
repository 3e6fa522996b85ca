#include "dtsurv/kernels.hpp"

#include <cfloat>
#include <cmath>

namespace dtsurv::kernels {

namespace {

constexpr double kExpFlushBelow = -708.0;
constexpr double kExpitMax = 1.0 - 0x1p-53;

double exp_flushed(double x) {
  if (x < kExpFlushBelow) return 0.0;
  return std::exp(x);
}

void exp_array_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = exp_flushed(x[i]);
}

void expit_array_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = expit(x[i]);
}

double sum_expit_shift_scalar(double shift, const double* s, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += expit(shift + s[i]);
  return acc;
}

double softplus(double x) {
  // log(1 + e^x) without overflow: max(x, 0) + log1p(e^-|x|)
  double t = exp_flushed(-std::fabs(x));
  return (x > 0.0 ? x : 0.0) + std::log1p(t);
}

double bernoulli_loglik_scalar(const double* eta, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += y[i] * eta[i] - softplus(eta[i]);
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void syr_lower_scalar(double w, const double* x, std::size_t q, double* h, std::size_t ldh) {
  for (std::size_t i = 0; i < q; ++i) {
    const double wxi = w * x[i];
    double* row = h + i * ldh;
    for (std::size_t j = 0; j <= i; ++j) row[j] += wxi * x[j];
  }
}

}  // namespace

double expit(double x) {
  // Branch on sign, never exponentiate a positive argument; clamp so the
  // result stays strictly inside (0, 1) even at saturation.
  double t = exp_flushed(-std::fabs(x));
  double r = (x >= 0.0) ? 1.0 / (1.0 + t) : t / (1.0 + t);
  if (r > kExpitMax) r = kExpitMax;
  if (r < DBL_MIN) r = DBL_MIN;
  return r;
}

const Ops& scalar_ops() {
  static const Ops ops = {
      "scalar",
      exp_array_scalar,
      expit_array_scalar,
      sum_expit_shift_scalar,
      bernoulli_loglik_scalar,
      dot_scalar,
      axpy_scalar,
      syr_lower_scalar,
  };
  return ops;
}

}  // namespace dtsurv::kernels
