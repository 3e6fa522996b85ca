#pragma once

#include <span>
#include <string>
#include <vector>

#include "dtsurv/linalg.hpp"

namespace dtsurv {

// Discrete time grid. Internal indices are always 1..d; labels carry the
// display form, which may be regrouped ("21+", "6-7").
struct TimeGrid {
  int d = 0;
  std::vector<std::string> labels;

  static TimeGrid numeric(int d);
  void validate() const;
};

// Parameters of the logistic cause-specific hazard model: per-event-type time
// intercepts and covariate coefficients.
struct ModelParams {
  int M = 0;  // event types
  int d = 0;  // time points
  int p = 0;  // covariates

  std::vector<double> alpha;  // M x d, row-major
  std::vector<double> beta;   // M x p, row-major

  ModelParams() = default;
  ModelParams(int M_, int d_, int p_)
      : M(M_), d(d_), p(p_), alpha(static_cast<std::size_t>(M_) * d_, 0.0),
        beta(static_cast<std::size_t>(M_) * p_, 0.0) {}

  // 0-based accessors
  double& alpha_at(int j, int t) { return alpha[static_cast<std::size_t>(j) * d + t]; }
  double alpha_at(int j, int t) const { return alpha[static_cast<std::size_t>(j) * d + t]; }
  double& beta_at(int j, int k) { return beta[static_cast<std::size_t>(j) * p + k]; }
  double beta_at(int j, int k) const { return beta[static_cast<std::size_t>(j) * p + k]; }
  std::span<const double> beta_row(int j) const { return {beta.data() + static_cast<std::size_t>(j) * p, static_cast<std::size_t>(p)}; }

  void validate() const;  // finite entries, M >= 1, d >= 1, p >= 0
};

// All model operations take 1-based event type j in 1..M and time t in 1..d.

/// Conditional probability of a type-j event at time t given survival to t.
double hazard(const ModelParams& params, int j, int t, std::span<const double> z);

/// S(t|z) for t = 0..d; S(0) = 1. Errors if hazards sum to >= 1 at some t.
std::vector<double> overall_survival(const ModelParams& params, std::span<const double> z);

/// Pr(T = t, J = j | z) for t = 1..d (index 0 holds t = 1).
std::vector<double> event_probability(const ModelParams& params, int j, std::span<const double> z);

/// F_j(t|z) for t = 1..d: cumulative incidence of cause j.
std::vector<double> cif(const ModelParams& params, int j, std::span<const double> z);

/// Pr(J = j | z) = F_j(d|z).
double marginal_event_probability(const ModelParams& params, int j, std::span<const double> z);

// Per-observation prediction table in long format: one row per (observation,
// time point), with hazards, event probabilities and CIFs for every event
// type plus overall survival.
struct CurveTable {
  struct Row {
    std::string id;
    int t = 0;                       // 1-based time index
    std::vector<double> hazard;      // per event type
    std::vector<double> event_prob;  // per event type
    std::vector<double> cif;         // per event type
    double survival = 1.0;           // S(t)
  };

  int M = 0;
  std::vector<std::string> time_labels;
  std::vector<Row> rows;
};

CurveTable predict_curves(const ModelParams& params, const TimeGrid& grid,
                          const std::vector<std::vector<double>>& newdata,
                          const std::vector<std::string>* ids = nullptr);

}  // namespace dtsurv
