#include "dtsurv/expansion_fitter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <vector>

#include "dtsurv/errors.hpp"
#include "dtsurv/objectives.hpp"

namespace dtsurv {

namespace {

constexpr double kSeparationBound = 30.0;

double logit(double q) { return std::log(q / (1.0 - q)); }

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct CauseFit {
  SolveReport report;
  double loglik = 0.0;
};

CauseFit fit_one_cause(const ExpandedDataset& ex, const EventTable& counts, int cause, int d,
                       int p, const ExpansionFitOptions& options) {
  CollapsedLikelihood obj(ex, cause);

  // start at the marginal per-time solution with zero covariate effects
  std::vector<double> init(static_cast<std::size_t>(d + p), 0.0);
  for (int t = 0; t < d; ++t) {
    const double y_t = static_cast<double>(counts.at_risk[t]);
    double q = std::max(static_cast<double>(counts.event_count(t, cause - 1)), 0.5) / y_t;
    q = std::min(q, (y_t - 0.5) / y_t);
    init[t] = logit(q);
  }

  SolveOptions solve_options;
  solve_options.tol = options.tol;
  solve_options.max_iter = options.max_iter;
  solve_options.separation_bound = kSeparationBound;

  CauseFit out;
  if (options.penalty.has_value() && !options.penalty->is_zero()) {
    options.penalty->validate(p);
    PenaltySpec full;  // intercepts are never shrunk
    full.l1_ratio = options.penalty->l1_ratio;
    full.penalizer.assign(static_cast<std::size_t>(d + p), 0.0);
    for (int k = 0; k < p; ++k) full.penalizer[d + k] = options.penalty->weight(k);
    out.report = proximal_newton_maximize(obj, full, init, solve_options);
  } else {
    out.report = newton_maximize(obj, init, solve_options);
  }
  if (!out.report.converged)
    throw ConvergenceError("event type " + std::to_string(cause) + ": " + out.report.message +
                           " (gradient norm " + short_num(out.report.grad_norm) + ")");
  out.loglik = obj.value(out.report.solution);
  return out;
}

}  // namespace

FittedModel fit_expansion(const SurvivalDataset& ds, const ExpansionFitOptions& options) {
  ds.validate();
  const int d = ds.d();
  const int p = ds.p();
  const int M = ds.M;

  ValidationReport validation = validate_counts(ds, std::max<std::int64_t>(1, options.min_events));
  if (!validation.ok) throw EstimabilityError(validation.describe(), validation.cells());

  for (int k = 0; k < p; ++k) {
    double lo = ds.observations.front().z[k];
    double hi = lo;
    for (const Observation& o : ds.observations) {
      lo = std::min(lo, o.z[k]);
      hi = std::max(hi, o.z[k]);
    }
    if (hi == lo)
      throw DataError("covariate '" + ds.covariate_names[k] +
                      "' is constant; it cannot be separated from the time intercepts");
  }

  const ExpandedDataset ex = expand(ds);
  const EventTable counts = event_table(ds);

  std::vector<CauseFit> fits(M);
  if (options.parallel && M > 1) {
    std::vector<std::future<CauseFit>> futures;
    futures.reserve(M);
    for (int j = 1; j <= M; ++j)
      futures.push_back(std::async(std::launch::async, fit_one_cause, std::cref(ex),
                                   std::cref(counts), j, d, p, std::cref(options)));
    for (int j = 0; j < M; ++j) fits[j] = futures[j].get();
  } else {
    for (int j = 1; j <= M; ++j) fits[j - 1] = fit_one_cause(ex, counts, j, d, p, options);
  }

  FittedModel fitted;
  fitted.method = "expansion";
  fitted.grid = ds.grid;
  fitted.covariate_names = ds.covariate_names;
  fitted.params = ModelParams(M, d, p);
  fitted.alpha_se = Matrix(M, d, 0.0);
  fitted.beta_se = Matrix(M, p, 0.0);
  for (int j = 0; j < M; ++j) {
    const CauseFit& fit = fits[j];
    for (int t = 0; t < d; ++t) fitted.params.alpha_at(j, t) = fit.report.solution[t];
    for (int k = 0; k < p; ++k) fitted.params.beta_at(j, k) = fit.report.solution[d + k];
    if (fit.report.covariance.empty())
      throw ConvergenceError("event type " + std::to_string(j + 1) +
                             ": observed information is singular at the optimum");
    for (int t = 0; t < d; ++t) fitted.alpha_se(j, t) = std::sqrt(fit.report.covariance(t, t));
    for (int k = 0; k < p; ++k)
      fitted.beta_se(j, k) = std::sqrt(fit.report.covariance(d + k, d + k));
    fitted.loglik.push_back(fit.loglik);
    fitted.iterations.push_back(fit.report.iterations);
    fitted.converged.push_back(fit.report.converged ? 1 : 0);
  }
  return fitted;
}

}  // namespace dtsurv
