#include "dtsurv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtsurv/errors.hpp"

namespace dtsurv {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double dot_small(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double soft_threshold(double c, double lambda) {
  if (c > lambda) return c - lambda;
  if (c < -lambda) return c + lambda;
  return 0.0;
}

void check_separation(std::span<const double> x, const PenaltySpec* penalty, double bound) {
  if (bound <= 0.0) return;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const bool penalized = penalty != nullptr && penalty->weight(static_cast<int>(k)) > 0.0;
    if (!penalized && std::fabs(x[k]) > bound) {
      std::ostringstream os;
      os << "coordinate " << k << " reached " << x[k] << " (bound " << bound
         << "); the likelihood appears unbounded (complete separation)";
      throw SeparationError(os.str());
    }
  }
}

// Factor -H (+ damping toward the identity when needed). Returns the factored
// matrix; sets damped when a shift was required.
Matrix factor_negative_hessian(const Matrix& h, bool* damped) {
  const int n = h.rows();
  Matrix a(n, n);
  double max_diag = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = -h(i, j);
      if (i == j) max_diag = std::max(max_diag, std::fabs(a(i, j)));
    }
  Matrix f = a;
  if (cholesky_factor_lower(f)) return f;

  double tau = 1e-8 * max_diag;
  for (int attempt = 0; attempt < 40; ++attempt) {
    f = a;
    for (int i = 0; i < n; ++i) f(i, i) += tau;
    if (cholesky_factor_lower(f)) {
      if (damped != nullptr) *damped = true;
      return f;
    }
    tau *= 10.0;
  }
  throw ConvergenceError("Hessian could not be stabilized even with heavy damping");
}

}  // namespace

bool PenaltySpec::is_zero() const {
  for (double w : penalizer)
    if (w != 0.0) return false;
  return true;
}

void PenaltySpec::validate(int dim) const {
  if (penalizer.empty() || (penalizer.size() != 1 && static_cast<int>(penalizer.size()) != dim))
    throw ArgumentError("penalizer must be a scalar or one weight per coordinate");
  for (double w : penalizer) {
    if (!(w >= 0.0)) throw ArgumentError("penalizer weights must be non-negative");
  }
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) throw ArgumentError("l1_ratio must lie in [0, 1]");
}

double penalty_value(const PenaltySpec& spec, std::span<const double> beta) {
  spec.validate(static_cast<int>(beta.size()));
  const double r = spec.l1_ratio;
  double v = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double w = spec.weight(static_cast<int>(k));
    v += w * ((1.0 - r) * 0.5 * beta[k] * beta[k] + r * std::fabs(beta[k]));
  }
  return v;
}

std::vector<double> penalty_subgradient(const PenaltySpec& spec, std::span<const double> beta) {
  spec.validate(static_cast<int>(beta.size()));
  const double r = spec.l1_ratio;
  std::vector<double> g(beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double w = spec.weight(static_cast<int>(k));
    const double sign = beta[k] > 0.0 ? 1.0 : (beta[k] < 0.0 ? -1.0 : 0.0);
    g[k] = w * ((1.0 - r) * beta[k] + r * sign);
  }
  return g;
}

SolveReport newton_maximize(const SmoothObjective& obj, std::span<const double> init,
                            const SolveOptions& options) {
  const int n = obj.dim();
  if (static_cast<int>(init.size()) != n) throw ArgumentError("init has wrong dimension");
  std::vector<double> x(init.begin(), init.end());
  for (double v : x)
    if (!std::isfinite(v)) throw ArgumentError("non-finite entry in the initial point");

  SolveReport report;
  std::vector<double> g(n), step(n), trial(n);
  Matrix h(n, n);

  double f = obj.eval(x, g, h);
  if (!std::isfinite(f)) throw ArgumentError("objective is non-finite at the initial point");

  for (int it = 0;; ++it) {
    report.grad_norm = max_abs(g);
    if (report.grad_norm <= options.tol) {
      report.converged = true;
      report.iterations = it;
      break;
    }
    if (it >= options.max_iter) {
      report.iterations = it;
      report.message = "no convergence after " + std::to_string(it) + " iterations";
      break;
    }

    Matrix factor = factor_negative_hessian(h, &report.damped);
    std::copy(g.begin(), g.end(), step.begin());
    cholesky_solve_inplace(factor, step);

    const double slope = dot_small(g, step);
    // absolute noise floor: near the optimum the Armijo comparison operates
    // at the roundoff level of the objective evaluation
    const double noise = (std::fabs(f) + 1.0) * 1e-12;
    double t = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      for (int k = 0; k < n; ++k) trial[k] = x[k] + t * step[k];
      const double ft = obj.value(trial);
      if (std::isfinite(ft) && ft >= f + 1e-4 * t * slope - noise) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      report.iterations = it;
      report.message = "line search failed to improve the objective";
      break;
    }
    x.swap(trial);
    check_separation(x, nullptr, options.separation_bound);
    f = obj.eval(x, g, h);
  }

  report.solution = x;
  // covariance candidate from the final (undamped) Hessian
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = -h(i, j);
  Matrix inv = spd_inverse(a);
  if (!inv.empty()) report.covariance = std::move(inv);
  return report;
}

SolveReport proximal_newton_maximize(const SmoothObjective& obj, const PenaltySpec& penalty,
                                     std::span<const double> init, const SolveOptions& options) {
  const int n = obj.dim();
  penalty.validate(n);
  if (penalty.is_zero()) return newton_maximize(obj, init, options);

  if (static_cast<int>(init.size()) != n) throw ArgumentError("init has wrong dimension");
  std::vector<double> x(init.begin(), init.end());

  const double r = penalty.l1_ratio;
  auto ridge_w = [&](int k) { return penalty.weight(k) * (1.0 - r); };
  auto l1_w = [&](int k) { return penalty.weight(k) * r; };

  auto penalized_value = [&](std::span<const double> v) {
    return obj.value(v) - penalty_value(penalty, v);
  };

  SolveReport report;
  std::vector<double> g(n), delta(n), a_delta(n), trial(n);
  Matrix h(n, n);

  double f = obj.eval(x, g, h);
  if (!std::isfinite(f)) throw ArgumentError("objective is non-finite at the initial point");
  double fpen = f - penalty_value(penalty, x);

  for (int it = 0;; ++it) {
    // KKT residual of the penalized problem
    double kkt = 0.0;
    for (int k = 0; k < n; ++k) {
      const double smooth = g[k] - ridge_w(k) * x[k];
      if (x[k] != 0.0) {
        kkt = std::max(kkt, std::fabs(smooth - l1_w(k) * (x[k] > 0.0 ? 1.0 : -1.0)));
      } else {
        kkt = std::max(kkt, std::max(0.0, std::fabs(smooth) - l1_w(k)));
      }
    }
    report.grad_norm = kkt;
    if (kkt <= options.tol) {
      report.converged = true;
      report.iterations = it;
      break;
    }
    if (it >= options.max_iter) {
      report.iterations = it;
      report.message = "no convergence after " + std::to_string(it) + " iterations";
      break;
    }

    // A = -H with a positive-diagonal safeguard for the coordinate steps
    Matrix a(n, n);
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = -h(i, j);
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    const double floor = std::max(1e-10, 1e-10 * max_diag);
    for (int i = 0; i < n; ++i)
      if (a(i, i) < floor) {
        a(i, i) = floor;
        report.damped = true;
      }

    // cyclic coordinate descent on the local quadratic model
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(a_delta.begin(), a_delta.end(), 0.0);
    for (int cycle = 0; cycle < 250; ++cycle) {
      double max_move = 0.0;
      for (int k = 0; k < n; ++k) {
        const double akk = a(k, k);
        const double s_off = a_delta[k] - akk * delta[k];
        const double c = g[k] + akk * x[k] - s_off;
        const double u = soft_threshold(c, l1_w(k)) / (akk + ridge_w(k));
        const double new_delta = u - x[k];
        const double move = new_delta - delta[k];
        if (move != 0.0) {
          for (int i = 0; i < n; ++i) a_delta[i] += a(i, k) * move;
          delta[k] = new_delta;
          max_move = std::max(max_move, std::fabs(move));
        }
      }
      if (max_move <= std::max(1e-14, 0.001 * options.tol)) break;
    }

    // model improvement for the Armijo test
    double model_gain = 0.0;
    for (int k = 0; k < n; ++k) model_gain += g[k] * delta[k] - 0.5 * delta[k] * a_delta[k];
    for (int k = 0; k < n; ++k) {
      const double u = x[k] + delta[k];
      model_gain -= ridge_w(k) * 0.5 * (u * u - x[k] * x[k]) +
                    l1_w(k) * (std::fabs(u) - std::fabs(x[k]));
    }
    if (max_abs(delta) == 0.0) {
      report.iterations = it;
      report.message = "coordinate step stalled before reaching tolerance";
      break;
    }

    double t = 1.0;
    bool accepted = false;
    const double noise = (std::fabs(fpen) + 1.0) * 1e-12;
    for (int half = 0; half < 40; ++half) {
      for (int k = 0; k < n; ++k) trial[k] = x[k] + t * delta[k];
      const double ft = penalized_value(trial);
      if (std::isfinite(ft) && ft >= fpen + 1e-4 * t * model_gain - noise) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      report.iterations = it;
      report.message = "line search failed to improve the penalized objective";
      break;
    }
    for (int k = 0; k < n; ++k) x[k] += t * delta[k];
    check_separation(x, &penalty, options.separation_bound);
    f = obj.eval(x, g, h);
    fpen = f - penalty_value(penalty, x);
  }

  report.solution = x;
  // covariance candidate from the smooth + ridge information (l1 part excluded)
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = -h(i, j);
  for (int i = 0; i < n; ++i) a(i, i) += ridge_w(i);
  Matrix inv = spd_inverse(a);
  if (!inv.empty()) report.covariance = std::move(inv);
  return report;
}

double monotone_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo <= hi)) throw ArgumentError("invalid bracket: lo > hi");
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  constexpr double kLimit = 50.0;

  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;

  // widen until f(lo) <= 0 <= f(hi), capped at +-50
  double grow = std::max(1.0, hi - lo);
  while (flo > 0.0) {
    if (lo <= -kLimit) {
      std::ostringstream os;
      os << "no sign change within [-50, 50]: f(-50) = " << flo << ", f(" << hi
         << ") = " << fhi;
      throw RootError(os.str());
    }
    lo = std::max(-kLimit, lo - grow);
    grow *= 2.0;
    flo = f(lo);
    if (flo == 0.0) return lo;
  }
  grow = std::max(1.0, hi - lo);
  while (fhi < 0.0) {
    if (hi >= kLimit) {
      std::ostringstream os;
      os << "no sign change within [-50, 50]: f(" << lo << ") = " << flo
         << ", f(50) = " << fhi;
      throw RootError(os.str());
    }
    hi = std::min(kLimit, hi + grow);
    grow *= 2.0;
    fhi = f(hi);
    if (fhi == 0.0) return hi;
  }

  // false position with Illinois weighting, guarded by bisection
  double wlo = flo;
  double whi = fhi;
  int last_move = 0;
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    double c;
    if (it % 3 == 2 || whi == wlo) {
      c = 0.5 * (lo + hi);
    } else {
      c = (lo * whi - hi * wlo) / (whi - wlo);
      const double margin = 1e-3 * (hi - lo);
      if (!(c > lo + margin && c < hi - margin)) c = 0.5 * (lo + hi);
    }
    const double fc = f(c);
    if (fc == 0.0) return c;
    if (fc < 0.0) {
      lo = c;
      wlo = fc;
      if (last_move == -1) whi *= 0.5;
      last_move = -1;
    } else {
      hi = c;
      whi = fc;
      if (last_move == 1) wlo *= 0.5;
      last_move = 1;
    }
  }
  return 0.5 * (lo + hi);
}

double finite_difference_check(const SmoothObjective& obj, std::span<const double> point,
                               double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  const int n = obj.dim();
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> g(n);
  obj.gradient(x, g);

  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const double saved = x[k];
    x[k] = saved + h;
    const double fp = obj.value(x);
    x[k] = saved - h;
    const double fm = obj.value(x);
    x[k] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double scale = std::max({1.0, std::fabs(numeric), std::fabs(g[k])});
    worst = std::max(worst, std::fabs(numeric - g[k]) / scale);
  }
  return worst;
}

}  // namespace dtsurv
