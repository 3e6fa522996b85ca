#pragma once

#include <string>
#include <vector>

#include "dtsurv/linalg.hpp"
#include "dtsurv/model.hpp"

namespace dtsurv {

// Estimated model plus standard errors, fit diagnostics and method provenance.
// alpha_se is populated by the data-expansion fitter only; the two-stage
// fitter provides no analytic standard errors for the intercepts.
struct FittedModel {
  ModelParams params;
  TimeGrid grid;
  std::vector<std::string> covariate_names;

  Matrix alpha_se;  // M x d, possibly empty
  Matrix beta_se;   // M x p

  std::vector<double> loglik;  // per event type, at the optimum
  std::vector<int> iterations;
  std::vector<char> converged;
  std::string method;  // "expansion" | "two-stage"

  bool has_alpha_se() const { return !alpha_se.empty(); }
};

// Coefficient summary: one row per (event type, parameter) with estimate,
// standard error, Wald z and two-sided p-value. Rows without standard errors
// (two-stage intercepts) carry has_se = false.
struct CoefficientTable {
  struct Row {
    int event;
    std::string parameter;
    double estimate;
    bool has_se;
    double se;
    double z;
    double p;
  };

  std::vector<Row> rows;
};

CoefficientTable summary(const FittedModel& fitted);

// M x p view of the coefficient standard errors.
Matrix get_beta_se(const FittedModel& fitted);

// predict_curves overload operating on a fitted model.
CurveTable predict_curves(const FittedModel& fitted,
                          const std::vector<std::vector<double>>& newdata,
                          const std::vector<std::string>* ids = nullptr);

}  // namespace dtsurv
