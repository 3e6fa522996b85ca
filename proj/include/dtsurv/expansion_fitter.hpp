#pragma once

#include <cstdint>
#include <optional>

#include "dtsurv/dataset.hpp"
#include "dtsurv/fitted_model.hpp"
#include "dtsurv/optim.hpp"

namespace dtsurv {

struct ExpansionFitOptions {
  std::optional<PenaltySpec> penalty;  // applies to covariate coefficients only
  double tol = 1e-8;
  int max_iter = 100;
  std::int64_t min_events = 1;
  bool parallel = false;  // fit event types concurrently
};

// Collapsed-likelihood estimation on person-period data: for each event type j
// a binary logistic model with d time-level intercepts and p covariate effects
// is fitted to the expanded dataset, one independent (d + p)-parameter
// maximization per event type. Standard errors come from the inverse observed
// information at the optimum.
FittedModel fit_expansion(const SurvivalDataset& ds, const ExpansionFitOptions& options = {});

}  // namespace dtsurv
