#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dtsurv/linalg.hpp"

using dtsurv::Matrix;

namespace {

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = dist(rng);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;  // + identity keeps it well conditioned
      for (int k = 0; k < n; ++k) s += b(k, i) * b(k, j);
      a(i, j) = s;
    }
  return a;
}

}  // namespace

TEST_CASE("cholesky solve and inverse on random SPD matrices") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 3, 5, 12, 35}) {
    Matrix a = random_spd(rng, n);
    Matrix f = a;
    REQUIRE(dtsurv::cholesky_factor_lower(f));

    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x_true(n);
    for (double& v : x_true) v = dist(rng);
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b[i] += a(i, j) * x_true[j];

    dtsurv::cholesky_solve_inplace(f, b);
    for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(x_true[i]).epsilon(1e-9));

    Matrix inv = dtsurv::cholesky_inverse(f);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a(i, k) * inv(k, j);
        CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      }
  }
}

TEST_CASE("cholesky rejects indefinite matrices") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = a(1, 0) = 3.0;
  a(1, 1) = 1.0;  // eigenvalues 4 and -2
  Matrix f = a;
  CHECK_FALSE(dtsurv::cholesky_factor_lower(f));
  CHECK(dtsurv::spd_inverse(a).empty());
}

TEST_CASE("symmetrize_from_lower mirrors the lower triangle") {
  Matrix a(3, 3);
  int v = 1;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = v++;
  dtsurv::symmetrize_from_lower(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(a(i, j) == a(j, i));
}
