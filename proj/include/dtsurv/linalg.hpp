#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dtsurv {

// Dense row-major matrix. Sized for the model's parameter blocks (at most a
// few dozen rows), not for bulk data.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}

  double& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  void fill(double v) { a_.assign(a_.size(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// Copies the lower triangle onto the upper one.
void symmetrize_from_lower(Matrix& a);

// In-place Cholesky factorization A = L L^T using the lower triangle.
// Returns false if A is not positive definite; A is left clobbered.
bool cholesky_factor_lower(Matrix& a);

// Solves L L^T x = b in place given the factor from cholesky_factor_lower.
void cholesky_solve_inplace(const Matrix& l, std::span<double> b);

// Inverse of A from its Cholesky factor.
Matrix cholesky_inverse(const Matrix& l);

// Convenience: inverse of a symmetric positive definite matrix (reads the
// lower triangle). Returns an empty matrix when factorization fails.
Matrix spd_inverse(const Matrix& a);

}  // namespace dtsurv
