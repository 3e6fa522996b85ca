#include "dtsurv/fitted_model.hpp"

#include <cmath>
#include <limits>

#include "dtsurv/errors.hpp"

namespace dtsurv {

namespace {

// two-sided normal p-value for a Wald statistic
double wald_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

}  // namespace

CoefficientTable summary(const FittedModel& fitted) {
  const ModelParams& params = fitted.params;
  CoefficientTable table;
  table.rows.reserve(static_cast<std::size_t>(params.M) * (params.d + params.p));

  for (int j = 0; j < params.M; ++j) {
    for (int t = 0; t < params.d; ++t) {
      CoefficientTable::Row row;
      row.event = j + 1;
      row.parameter = "alpha[" + fitted.grid.labels[t] + "]";
      row.estimate = params.alpha_at(j, t);
      row.has_se = fitted.has_alpha_se();
      if (row.has_se) {
        row.se = fitted.alpha_se(j, t);
        row.z = row.estimate / row.se;
        row.p = wald_p(row.z);
      } else {
        row.se = row.z = row.p = std::numeric_limits<double>::quiet_NaN();
      }
      table.rows.push_back(std::move(row));
    }
    for (int k = 0; k < params.p; ++k) {
      CoefficientTable::Row row;
      row.event = j + 1;
      row.parameter = fitted.covariate_names[k];
      row.estimate = params.beta_at(j, k);
      row.has_se = true;
      row.se = fitted.beta_se(j, k);
      row.z = row.estimate / row.se;
      row.p = wald_p(row.z);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

Matrix get_beta_se(const FittedModel& fitted) {
  if (fitted.beta_se.empty()) throw ArgumentError("fitted model carries no coefficient SEs");
  return fitted.beta_se;
}

CurveTable predict_curves(const FittedModel& fitted,
                          const std::vector<std::vector<double>>& newdata,
                          const std::vector<std::string>* ids) {
  return predict_curves(fitted.params, fitted.grid, newdata, ids);
}

}  // namespace dtsurv
