#include "dtsurv/simulation.hpp"

#include <cmath>
#include <limits>

#include "dtsurv/errors.hpp"
#include "dtsurv/kernels.hpp"

namespace dtsurv {

ModelParams CoefficientSpec::to_params() const {
  ModelParams params(M, d, p);
  params.alpha = alpha;
  params.beta = beta;
  params.validate();
  return params;
}

void CoefficientSpec::validate() const {
  if (M < 1 || d < 1 || p < 0) throw ArgumentError("invalid coefficient spec dimensions");
  if (alpha.size() != static_cast<std::size_t>(M) * d ||
      beta.size() != static_cast<std::size_t>(M) * p)
    throw ArgumentError("coefficient spec storage does not match its dimensions");
  for (double v : alpha)
    if (!std::isfinite(v)) throw ArgumentError("non-finite intercept in coefficient spec");
  for (double v : beta)
    if (!std::isfinite(v)) throw ArgumentError("non-finite coefficient in coefficient spec");
}

CoefficientSpec CoefficientSpec::reference(int d) {
  CoefficientSpec spec;
  spec.M = 2;
  spec.d = d;
  spec.p = 5;
  spec.alpha.resize(2 * static_cast<std::size_t>(d));
  for (int t = 1; t <= d; ++t) {
    spec.alpha[t - 1] = -1.0 - 0.3 * std::log(static_cast<double>(t));
    spec.alpha[d + t - 1] = -1.75 - 0.15 * std::log(static_cast<double>(t));
  }
  const double b1[5] = {0.8, 3.0, 3.0, 2.5, 2.0};
  const double b2[5] = {1.0, 3.0, 4.0, 3.0, 2.0};
  spec.beta.resize(10);
  for (int k = 0; k < 5; ++k) {
    spec.beta[k] = -std::log(b1[k]);
    spec.beta[5 + k] = -std::log(b2[k]);
  }
  return spec;
}

void CensoringSpec::validate() const {
  if (!(censoring_prob >= 0.0 && censoring_prob <= 1.0))
    throw ArgumentError("censoring probability must lie in [0, 1]");
}

CovariateRule CovariateRule::uniform01() {
  return {"uniform01", [](Xoshiro256& rng) { return rng.uniform(); }};
}

CovariateRule CovariateRule::standard_normal() {
  return {"standard_normal", [](Xoshiro256& rng) {
            // Box-Muller without caching so each draw is a pure function of
            // the stream position
            double u1 = rng.uniform();
            double u2 = rng.uniform();
            if (u1 <= 0.0) u1 = 0x1.0p-53;
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
          }};
}

CovariateRule CovariateRule::by_name(const std::string& name) {
  if (name == "uniform01") return uniform01();
  if (name == "standard_normal") return standard_normal();
  throw ArgumentError("unknown covariate rule '" + name + "'");
}

SurvivalDataset generate(long n, const CoefficientSpec& spec, const CensoringSpec& censoring,
                         const CovariateRule& rule, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("need at least one subject");
  spec.validate();
  censoring.validate();
  if (!rule.draw) throw ArgumentError("covariate rule has no sampler");

  const int M = spec.M;
  const int d = spec.d;
  const int p = spec.p;

  SurvivalDataset ds;
  ds.M = M;
  ds.grid = TimeGrid::numeric(d);
  for (int k = 0; k < p; ++k) ds.covariate_names.push_back("Z" + std::to_string(k + 1));
  ds.observations.resize(n);

  std::vector<double> zbeta(M);
  std::vector<double> lam(M);
  for (long i = 0; i < n; ++i) {
    Xoshiro256 rng = Xoshiro256::subject_stream(seed, static_cast<std::uint64_t>(i));
    Observation& o = ds.observations[i];
    o.id = std::to_string(i);
    o.z.resize(p);
    for (int k = 0; k < p; ++k) o.z[k] = rule.draw(rng);

    for (int j = 0; j < M; ++j) {
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += o.z[k] * spec.beta_at(j, k);
      zbeta[j] = s;
    }

    int event_time = 0;  // 0 = survived past the grid
    int event_type = 0;
    for (int t = 1; t <= d && event_time == 0; ++t) {
      double total = 0.0;
      for (int j = 0; j < M; ++j) {
        lam[j] = kernels::expit(spec.alpha_at(j, t - 1) + zbeta[j]);
        total += lam[j];
      }
      if (total >= 1.0)
        throw AdmissibilityError(
            "coefficient spec is inadmissible: hazards sum to " + std::to_string(total) +
                " at t = " + std::to_string(t) + " for a sampled covariate vector",
            t);
      const double u = rng.uniform();
      double cum = 0.0;
      for (int j = 0; j < M; ++j) {
        cum += lam[j];
        if (u < cum) {
          event_time = t;
          event_type = j + 1;
          break;
        }
      }
    }

    int censor_time = d + 1;
    if (censoring.kind == CensoringSpec::Kind::uniform_discrete) {
      if (rng.uniform() < censoring.censoring_prob)
        censor_time = 1 + static_cast<int>(rng.uniform() * (d + 1));
    }

    if (event_time != 0 && event_time <= censor_time) {
      o.x = event_time;
      o.j = event_type;
    } else {
      o.x = censor_time;
      o.j = 0;
    }
  }
  ds.validate();
  return ds;
}

CellProbabilities expected_cell_probabilities(const CoefficientSpec& spec,
                                              const CovariateRule& rule, long mc_draws,
                                              std::uint64_t seed) {
  if (mc_draws < 1) throw ArgumentError("need at least one Monte-Carlo draw");
  spec.validate();
  if (!rule.draw) throw ArgumentError("covariate rule has no sampler");

  const ModelParams params = spec.to_params();
  CellProbabilities cells;
  cells.M = spec.M;
  cells.d = spec.d;
  cells.event.assign(static_cast<std::size_t>(spec.d) * spec.M, 0.0);
  cells.at_risk.assign(spec.d, 0.0);

  std::vector<double> z(spec.p);
  for (long i = 0; i < mc_draws; ++i) {
    Xoshiro256 rng = Xoshiro256::subject_stream(seed, static_cast<std::uint64_t>(i));
    for (int k = 0; k < spec.p; ++k) z[k] = rule.draw(rng);

    const std::vector<double> surv = overall_survival(params, z);
    for (int t0 = 0; t0 < spec.d; ++t0) cells.at_risk[t0] += surv[t0];
    for (int j = 1; j <= spec.M; ++j) {
      const std::vector<double> prob = event_probability(params, j, z);
      for (int t0 = 0; t0 < spec.d; ++t0)
        cells.event[static_cast<std::size_t>(t0) * spec.M + (j - 1)] += prob[t0];
    }
  }
  const double inv = 1.0 / static_cast<double>(mc_draws);
  for (double& v : cells.event) v *= inv;
  for (double& v : cells.at_risk) v *= inv;
  return cells;
}

}  // namespace dtsurv
