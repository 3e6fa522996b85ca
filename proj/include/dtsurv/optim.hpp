#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dtsurv/linalg.hpp"

namespace dtsurv {

// Twice-differentiable objective to be maximized. Implementations may override
// eval() to produce value, gradient and Hessian in one pass over the data.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;

  virtual int dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
  virtual void hessian(std::span<const double> x, Matrix& h) const = 0;

  virtual double eval(std::span<const double> x, std::span<double> g, Matrix& h) const {
    gradient(x, g);
    hessian(x, h);
    return value(x);
  }
};

// Elastic-net penalty: sum_k w_k [ (1 - l1_ratio)/2 beta_k^2 + l1_ratio |beta_k| ].
// penalizer holds either one broadcast weight or one weight per coordinate.
struct PenaltySpec {
  std::vector<double> penalizer{0.0};
  double l1_ratio = 0.0;

  static PenaltySpec scalar(double w, double l1_ratio = 0.0) { return {{w}, l1_ratio}; }

  double weight(int k) const { return penalizer.size() == 1 ? penalizer[0] : penalizer[k]; }
  bool is_zero() const;
  void validate(int dim) const;
};

double penalty_value(const PenaltySpec& spec, std::span<const double> beta);
std::vector<double> penalty_subgradient(const PenaltySpec& spec, std::span<const double> beta);

struct SolveReport {
  std::vector<double> solution;
  bool converged = false;
  int iterations = 0;
  // final gradient max-norm (KKT residual for penalized solves)
  double grad_norm = std::numeric_limits<double>::infinity();
  // inverse negative Hessian at the solution; empty if unavailable
  Matrix covariance;
  bool damped = false;
  std::string message;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 100;
  // When positive, abort with SeparationError if an unpenalized coordinate
  // exceeds this magnitude during the solve (unbounded logistic likelihood).
  double separation_bound = 0.0;
};

// Newton's method with step-halving line search. Singular or indefinite
// Hessians fall back to a damped step (shifted toward -identity), recorded in
// the report. Non-convergence is reported, not thrown.
SolveReport newton_maximize(const SmoothObjective& obj, std::span<const double> init,
                            const SolveOptions& options = {});

// Maximizes obj(x) - penalty(x). With an l1 component, solves the local
// quadratic model by cyclic coordinate descent with soft-thresholding, so
// exact zeros are representable; otherwise reduces to Newton on the smooth
// penalized objective.
SolveReport proximal_newton_maximize(const SmoothObjective& obj, const PenaltySpec& penalty,
                                     std::span<const double> init,
                                     const SolveOptions& options = {});

// Root of a continuous non-decreasing function. The bracket expands
// automatically up to [-50, 50]; inside it, bisection with secant acceleration
// runs until the bracket is narrower than tol (or an exact zero is hit).
double monotone_root(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-9);

// Max relative discrepancy between the analytic gradient and central finite
// differences with step h.
double finite_difference_check(const SmoothObjective& obj, std::span<const double> point,
                               double h);

}  // namespace dtsurv
