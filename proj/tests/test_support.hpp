#pragma once

// Shared helpers and independent oracles for the test suites. Everything here
// is deliberately naive and self-contained (plain std::exp, direct loops,
// derivative-free search) so it exercises none of the library's numeric paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtsurv/dataset.hpp"

namespace oracle {

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double q) { return std::log(q / (1.0 - q)); }

// Collapsed binary log-likelihood for one event type, straight from the
// definition: double loop over subjects and their at-risk periods.
inline double collapsed_loglik(const dtsurv::SurvivalDataset& ds, int cause,
                               std::span<const double> alpha, std::span<const double> beta) {
  double ll = 0.0;
  for (const dtsurv::Observation& o : ds.observations) {
    double zb = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) zb += o.z[k] * beta[k];
    const int last = std::min(o.x, ds.d());
    for (int m = 1; m <= last; ++m) {
      const double lam = expit(alpha[m - 1] + zb);
      const bool event = (o.x == m && o.j == cause);
      ll += event ? std::log(lam) : std::log(1.0 - lam);
    }
  }
  return ll;
}

// Plain bisection to a bracket width of tol.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-12) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Nelder-Mead maximization followed by finite-difference Newton polishing.
// Derivative-free and independent of any analytic gradient code.
inline std::vector<double> nelder_mead_max(const std::function<double(std::span<const double>)>& f,
                                           std::vector<double> start, double scale,
                                           int iterations) {
  const int n = static_cast<int>(start.size());
  auto neg = [&](const std::vector<double>& x) { return -f(x); };

  std::vector<std::vector<double>> simplex(n + 1, start);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += scale;
  std::vector<double> fv(n + 1);
  for (int i = 0; i <= n; ++i) fv[i] = neg(simplex[i]);

  for (int it = 0; it < iterations; ++it) {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    if (fv[idx[n]] - fv[idx[0]] < 1e-14) break;

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) centroid[k] += simplex[idx[i]][k] / n;

    auto point = [&](double coef) {
      std::vector<double> x(n);
      for (int k = 0; k < n; ++k)
        x[k] = centroid[k] + coef * (simplex[idx[n]][k] - centroid[k]);
      return x;
    };

    const std::vector<double> reflected = point(-1.0);
    const double fr = neg(reflected);
    if (fr < fv[idx[0]]) {
      const std::vector<double> expanded = point(-2.0);
      const double fe = neg(expanded);
      if (fe < fr) {
        simplex[idx[n]] = expanded;
        fv[idx[n]] = fe;
      } else {
        simplex[idx[n]] = reflected;
        fv[idx[n]] = fr;
      }
    } else if (fr < fv[idx[n - 1]]) {
      simplex[idx[n]] = reflected;
      fv[idx[n]] = fr;
    } else {
      const std::vector<double> contracted = point(0.5);
      const double fc = neg(contracted);
      if (fc < fv[idx[n]]) {
        simplex[idx[n]] = contracted;
        fv[idx[n]] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int k = 0; k < n; ++k)
            simplex[idx[i]][k] = 0.5 * (simplex[idx[i]][k] + simplex[idx[0]][k]);
          fv[idx[i]] = neg(simplex[idx[i]]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  return simplex[best];
}

// Newton refinement with finite-difference gradient and Hessian; the linear
// solve is naive Gaussian elimination with partial pivoting.
inline std::vector<double> fd_newton_polish(const std::function<double(std::span<const double>)>& f,
                                            std::vector<double> x, int steps, double h = 1e-5) {
  const int n = static_cast<int>(x.size());
  for (int step = 0; step < steps; ++step) {
    std::vector<double> g(n);
    std::vector<std::vector<double>> hess(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<double> xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (f(xp) - f(xm)) / (2 * h);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        std::vector<double> xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h;
        xpp[j] += h;
        xpm[i] += h;
        xpm[j] -= h;
        xmp[i] -= h;
        xmp[j] += h;
        xmm[i] -= h;
        xmm[j] -= h;
        hess[i][j] = hess[j][i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4 * h * h);
      }

    // solve hess * s = -g
    std::vector<std::vector<double>> a = hess;
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = -g[i];
    for (int col = 0; col < n; ++col) {
      int pivot = col;
      for (int r = col + 1; r < n; ++r)
        if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
      std::swap(a[col], a[pivot]);
      std::swap(b[col], b[pivot]);
      for (int r = col + 1; r < n; ++r) {
        const double m = a[r][col] / a[col][col];
        for (int c = col; c < n; ++c) a[r][c] -= m * a[col][c];
        b[r] -= m * b[col];
      }
    }
    std::vector<double> s(n);
    for (int r = n - 1; r >= 0; --r) {
      double v = b[r];
      for (int c = r + 1; c < n; ++c) v -= a[r][c] * s[c];
      s[r] = v / a[r][r];
    }
    const double before = f(x);
    std::vector<double> trial(n);
    double t = 1.0;
    for (int half = 0; half < 20; ++half) {
      for (int k = 0; k < n; ++k) trial[k] = x[k] + t * s[k];
      if (f(trial) >= before - 1e-13 * (std::fabs(before) + 1)) break;
      t *= 0.5;
    }
    x = trial;
  }
  return x;
}

// Two-sided normal p-value by Simpson quadrature over the density tail.
inline double normal_two_sided_p(double z) {
  const double a = std::fabs(z);
  const double b = a + 14.0;
  const int intervals = 8000;  // even
  const double h = (b - a) / intervals;
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846); };
  double sum = phi(a) + phi(b);
  for (int i = 1; i < intervals; ++i) sum += phi(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return 2.0 * sum * h / 3.0;
}

// Hand-built dataset: one subject per entry of (x, j, z).
inline dtsurv::SurvivalDataset make_dataset(const std::vector<int>& x, const std::vector<int>& j,
                                            const std::vector<std::vector<double>>& z, int M,
                                            int d) {
  dtsurv::SurvivalDataset ds;
  ds.M = M;
  ds.grid = dtsurv::TimeGrid::numeric(d);
  const int p = z.empty() ? 0 : static_cast<int>(z.front().size());
  for (int k = 0; k < p; ++k) ds.covariate_names.push_back("Z" + std::to_string(k + 1));
  for (std::size_t i = 0; i < x.size(); ++i) {
    dtsurv::Observation o;
    o.id = "s" + std::to_string(i);
    o.x = x[i];
    o.j = j[i];
    o.z = z.empty() ? std::vector<double>{} : z[i];
    ds.observations.push_back(std::move(o));
  }
  ds.validate();
  return ds;
}

inline std::string temp_path(const std::string& name) {
  return "dtsurv_test_" + name;  // tests run in the build directory
}

}  // namespace oracle
