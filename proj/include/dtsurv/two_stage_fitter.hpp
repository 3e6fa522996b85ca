#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "dtsurv/dataset.hpp"
#include "dtsurv/fitted_model.hpp"
#include "dtsurv/objectives.hpp"
#include "dtsurv/optim.hpp"

namespace dtsurv {

struct TwoStageFitOptions {
  std::optional<PenaltySpec> penalty;  // applies to the coefficient stage only
  TieMethod ties = TieMethod::efron;
  double tol = 1e-8;
  int max_iter = 100;
  double root_tol = 1e-9;
  std::int64_t min_events = 1;
  bool parallel = false;
};

struct BetaFit {
  std::vector<double> beta;
  Matrix covariance;  // p x p, inverse observed information
  SolveReport report;
};

// Stage 1: coefficients for event type j from the partial likelihood
// stratified on event time, eliminating the time intercepts. Uses the
// person-period risk structure implicitly via nested risk sets over the
// original data.
BetaFit fit_beta(const SurvivalDataset& ds, int j,
                 const std::optional<PenaltySpec>& penalty = {}, double tol = 1e-8,
                 int max_iter = 100, TieMethod ties = TieMethod::efron);

// Stage 2: with coefficients frozen, each time intercept solves
//   mean over the time-t risk set of expit(a + z.beta) = n_tj / y_t
// independently on the original (non-expanded) data.
std::vector<double> fit_alpha(const SurvivalDataset& ds, int j, std::span<const double> beta,
                              double root_tol = 1e-9);

// Both stages for every event type. Coefficient standard errors come from the
// stratified-analysis covariance; intercept standard errors are not provided
// by this method.
FittedModel fit_two_stage(const SurvivalDataset& ds, const TwoStageFitOptions& options = {});

}  // namespace dtsurv
