#include "dtsurv/linalg.hpp"

#include <cmath>

namespace dtsurv {

void symmetrize_from_lower(Matrix& a) {
  const int n = a.rows();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i);
}

bool cholesky_factor_lower(Matrix& a) {
  const int n = a.rows();
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  return true;
}

void cholesky_solve_inplace(const Matrix& l, std::span<double> b) {
  const int n = l.rows();
  // forward: L y = b
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  // backward: L^T x = y
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
}

Matrix cholesky_inverse(const Matrix& l) {
  const int n = l.rows();
  Matrix inv(n, n, 0.0);
  std::vector<double> e(n);
  for (int c = 0; c < n; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    e[c] = 1.0;
    cholesky_solve_inplace(l, e);
    for (int r = 0; r < n; ++r) inv(r, c) = e[r];
  }
  // enforce exact symmetry against roundoff
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

Matrix spd_inverse(const Matrix& a) {
  Matrix f = a;
  if (!cholesky_factor_lower(f)) return Matrix();
  return cholesky_inverse(f);
}

}  // namespace dtsurv
