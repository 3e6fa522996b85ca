#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtsurv/dataset.hpp"
#include "dtsurv/model.hpp"
#include "dtsurv/rng.hpp"

namespace dtsurv {

// Generating coefficients for synthetic data: evaluated time intercepts per
// event type plus covariate coefficients.
struct CoefficientSpec {
  int M = 0;
  int d = 0;
  int p = 0;
  std::vector<double> alpha;  // M x d, row-major
  std::vector<double> beta;   // M x p, row-major

  double alpha_at(int j, int t) const { return alpha[static_cast<std::size_t>(j) * d + t]; }
  double beta_at(int j, int k) const { return beta[static_cast<std::size_t>(j) * p + k]; }

  ModelParams to_params() const;
  void validate() const;

  // The package's reference scenario: two event types, five covariates,
  // log-decaying intercepts -1 - 0.3 log t and -1.75 - 0.15 log t, and
  // coefficient rows -log(0.8, 3, 3, 2.5, 2) and -log(1, 3, 4, 3, 2).
  static CoefficientSpec reference(int d = 30);
};

// Right-censoring: with probability censoring_prob the subject draws
// C ~ Uniform{1, ..., d+1}; otherwise (and for kind none) C = d + 1, i.e.
// censoring cannot occur inside the grid.
struct CensoringSpec {
  enum class Kind { uniform_discrete, none };

  Kind kind = Kind::uniform_discrete;
  double censoring_prob = 1.0;

  void validate() const;
};

// Named covariate sampler; the name travels with serialized simulation specs.
struct CovariateRule {
  std::string name;
  std::function<double(Xoshiro256&)> draw;

  static CovariateRule uniform01();
  static CovariateRule standard_normal();
  static CovariateRule by_name(const std::string& name);
};

// Samples n subjects under the logistic hazard model: per subject, draw
// covariates, walk t = 1..d drawing a categorical outcome over the event
// types, then apply censoring; X = min(T, C, d+1) with J = 0 when censored.
// Deterministic for a fixed (n, spec, censoring, rule, seed).
SurvivalDataset generate(long n, const CoefficientSpec& spec, const CensoringSpec& censoring,
                         const CovariateRule& rule, std::uint64_t seed);

// Monte-Carlo estimates of E_Z[Pr(T = t, J = j | Z)] and E_Z[S(t-1 | Z)]
// under the spec: the population analogs of the per-cell event counts and
// risk-set sizes (censoring factors cancel in their ratio).
struct CellProbabilities {
  int M = 0;
  int d = 0;
  std::vector<double> event;    // d x M row-major
  std::vector<double> at_risk;  // length d

  double event_at(int t0, int j0) const { return event[static_cast<std::size_t>(t0) * M + j0]; }
};

CellProbabilities expected_cell_probabilities(const CoefficientSpec& spec,
                                              const CovariateRule& rule, long mc_draws,
                                              std::uint64_t seed);

}  // namespace dtsurv
