#include "dtsurv/two_stage_fitter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <vector>

#include "dtsurv/errors.hpp"
#include "dtsurv/kernels.hpp"
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

// subjects sorted by observed time descending: R_t is a prefix
struct RiskOrder {
  int n = 0;
  std::vector<int> x_sorted;
  std::vector<int> subject;

  explicit RiskOrder(const SurvivalDataset& ds) : n(ds.n()) {
    subject.resize(n);
    std::iota(subject.begin(), subject.end(), 0);
    std::stable_sort(subject.begin(), subject.end(), [&](int a, int b) {
      return ds.observations[a].x > ds.observations[b].x;
    });
    x_sorted.resize(n);
    for (int i = 0; i < n; ++i) x_sorted[i] = ds.observations[subject[i]].x;
  }
};

void check_event_strata(const SurvivalDataset& ds, int j, const EventTable& counts) {
  std::vector<std::pair<int, int>> bad;
  for (int t0 = 0; t0 < ds.d(); ++t0) {
    const std::int64_t events = counts.event_count(t0, j - 1);
    if (events >= 1 && counts.at_risk[t0] <= events) bad.emplace_back(j, t0 + 1);
  }
  if (!bad.empty()) {
    std::string msg = "event type " + std::to_string(j) +
                      ": some time strata have no at-risk subjects beyond the events (t =";
    for (auto& [jj, tt] : bad) msg += " " + std::to_string(tt);
    msg += "); regroup the data and refit";
    throw EstimabilityError(msg, bad);
  }
}

}  // namespace

BetaFit fit_beta(const SurvivalDataset& ds, int j, const std::optional<PenaltySpec>& penalty,
                 double tol, int max_iter, TieMethod ties) {
  ds.validate();
  if (j < 1 || j > ds.M)
    throw ArgumentError("event type " + std::to_string(j) + " out of range 1.." +
                        std::to_string(ds.M));
  const int p = ds.p();

  BetaFit out;
  if (p == 0) {
    out.report.converged = true;
    out.report.grad_norm = 0.0;
    return out;
  }

  const EventTable counts = event_table(ds);
  check_event_strata(ds, j, counts);

  StratifiedPartialLikelihood obj(ds, j, ties);

  std::int64_t total_events = 0;
  for (int t0 = 0; t0 < ds.d(); ++t0) total_events += counts.event_count(t0, j - 1);

  // catch covariates with no within-risk-set variation before they make the
  // information matrix singular
  {
    Matrix h;
    obj.hessian(std::vector<double>(p, 0.0), h);
    for (int k = 0; k < p; ++k)
      if (-h(k, k) <= 1e-12 * std::max<double>(1, total_events))
        throw DataError("covariate '" + ds.covariate_names[k] +
                        "' has no variation within the event-time risk sets");
  }

  SolveOptions solve_options;
  solve_options.tol = tol;
  solve_options.max_iter = max_iter;
  solve_options.separation_bound = kSeparationBound;

  std::vector<double> init(p, 0.0);
  SolveReport report;
  if (penalty.has_value() && !penalty->is_zero()) {
    penalty->validate(p);
    report = proximal_newton_maximize(obj, *penalty, init, solve_options);
  } else {
    report = newton_maximize(obj, init, solve_options);
  }
  if (!report.converged)
    throw ConvergenceError("event type " + std::to_string(j) +
                           " coefficient stage: " + report.message + " (gradient norm " +
                           short_num(report.grad_norm) + ")");
  if (report.covariance.empty())
    throw ConvergenceError("event type " + std::to_string(j) +
                           ": stratified information is singular at the optimum");

  out.beta = report.solution;
  out.covariance = report.covariance;
  out.report = std::move(report);
  return out;
}

std::vector<double> fit_alpha(const SurvivalDataset& ds, int j, std::span<const double> beta,
                              double root_tol) {
  ds.validate();
  if (j < 1 || j > ds.M)
    throw ArgumentError("event type " + std::to_string(j) + " out of range 1.." +
                        std::to_string(ds.M));
  if (static_cast<int>(beta.size()) != ds.p())
    throw ArgumentError("coefficient vector has wrong dimension");
  for (double b : beta)
    if (!std::isfinite(b)) throw ArgumentError("non-finite coefficient");

  const int d = ds.d();
  const EventTable counts = event_table(ds);
  for (int t0 = 0; t0 < d; ++t0) {
    const std::int64_t y_t = counts.at_risk[t0];
    const std::int64_t n_tj = counts.event_count(t0, j - 1);
    if (y_t <= 0 || n_tj <= 0 || n_tj >= y_t)
      throw BoundaryError("event type " + std::to_string(j) + ", time " + std::to_string(t0 + 1) +
                              ": observed event fraction " + std::to_string(n_tj) + "/" +
                              std::to_string(y_t) +
                              " is at a boundary; regroup the data (clip or merge time points)",
                          j, t0 + 1);
  }

  const RiskOrder order(ds);
  const kernels::Ops& K = kernels::active();

  // linear predictors in risk order
  std::vector<double> s(order.n, 0.0);
  for (int i = 0; i < order.n; ++i) {
    const Observation& o = ds.observations[order.subject[i]];
    double v = 0.0;
    for (int k = 0; k < ds.p(); ++k) v += o.z[k] * beta[k];
    s[i] = v;
  }

  std::vector<double> alpha(d, 0.0);
  int idx = 0;
  double s_sum = 0.0;
  for (int t = d; t >= 1; --t) {
    while (idx < order.n && order.x_sorted[idx] >= t) {
      s_sum += s[idx];
      ++idx;
    }
    const double y_t = static_cast<double>(counts.at_risk[t - 1]);
    const double target = static_cast<double>(counts.event_count(t - 1, j - 1)) / y_t;
    const int risk_count = idx;

    auto residual = [&](double a) {
      return K.sum_expit_shift(a, s.data(), risk_count) / y_t - target;
    };
    const double center = logit(target) - s_sum / y_t;
    alpha[t - 1] = monotone_root(residual, center - 2.0, center + 2.0, root_tol);
  }
  return alpha;
}

namespace {

struct TwoStageCauseFit {
  BetaFit beta;
  std::vector<double> alpha;
  double loglik = 0.0;
};

TwoStageCauseFit fit_cause(const SurvivalDataset& ds, int j, const TwoStageFitOptions& options) {
  TwoStageCauseFit out;
  out.beta = fit_beta(ds, j, options.penalty, options.tol, options.max_iter, options.ties);
  out.alpha = fit_alpha(ds, j, out.beta.beta, options.root_tol);
  if (ds.p() > 0) {
    StratifiedPartialLikelihood obj(ds, j, options.ties);
    out.loglik = obj.value(out.beta.beta);
  } else {
    // with no covariates the partial likelihood reduces to -sum_t n_tj log y_t
    const EventTable counts = event_table(ds);
    for (int t0 = 0; t0 < ds.d(); ++t0)
      out.loglik -= static_cast<double>(counts.event_count(t0, j - 1)) *
                    std::log(static_cast<double>(counts.at_risk[t0]));
  }
  return out;
}

}  // namespace

FittedModel fit_two_stage(const SurvivalDataset& ds, const TwoStageFitOptions& options) {
  ds.validate();
  ValidationReport validation = validate_counts(ds, std::max<std::int64_t>(1, options.min_events));
  if (!validation.ok) throw EstimabilityError(validation.describe(), validation.cells());

  const int d = ds.d();
  const int p = ds.p();
  const int M = ds.M;

  std::vector<TwoStageCauseFit> fits(M);
  if (options.parallel && M > 1) {
    std::vector<std::future<TwoStageCauseFit>> futures;
    futures.reserve(M);
    for (int j = 1; j <= M; ++j)
      futures.push_back(
          std::async(std::launch::async, fit_cause, std::cref(ds), j, std::cref(options)));
    for (int j = 0; j < M; ++j) fits[j] = futures[j].get();
  } else {
    for (int j = 1; j <= M; ++j) fits[j - 1] = fit_cause(ds, j, options);
  }

  FittedModel fitted;
  fitted.method = "two-stage";
  fitted.grid = ds.grid;
  fitted.covariate_names = ds.covariate_names;
  fitted.params = ModelParams(M, d, p);
  fitted.beta_se = Matrix(M, p, 0.0);
  for (int j = 0; j < M; ++j) {
    const TwoStageCauseFit& fit = fits[j];
    for (int t = 0; t < d; ++t) fitted.params.alpha_at(j, t) = fit.alpha[t];
    for (int k = 0; k < p; ++k) {
      fitted.params.beta_at(j, k) = fit.beta.beta[k];
      fitted.beta_se(j, k) = std::sqrt(fit.beta.covariance(k, k));
    }
    fitted.loglik.push_back(fit.loglik);
    fitted.iterations.push_back(fit.beta.report.iterations);
    fitted.converged.push_back(fit.beta.report.converged ? 1 : 0);
  }
  return fitted;
}

}  // namespace dtsurv
