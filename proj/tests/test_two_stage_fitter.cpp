#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dtsurv/errors.hpp"
#include "dtsurv/expansion_fitter.hpp"
#include "dtsurv/kernels.hpp"
#include "dtsurv/objectives.hpp"
#include "dtsurv/simulation.hpp"
#include "dtsurv/two_stage_fitter.hpp"
#include "test_support.hpp"

using dtsurv::FittedModel;
using dtsurv::StratifiedPartialLikelihood;
using dtsurv::SurvivalDataset;
using dtsurv::TieMethod;
using dtsurv::TwoStageFitOptions;

namespace {

SurvivalDataset small_simulated(long n, int d, std::uint64_t seed, double censor_prob = 0.5) {
  dtsurv::CoefficientSpec spec = dtsurv::CoefficientSpec::reference(d);
  dtsurv::CensoringSpec censoring;
  censoring.censoring_prob = censor_prob;
  return dtsurv::generate(n, spec, censoring, dtsurv::CovariateRule::uniform01(), seed);
}

}  // namespace

TEST_CASE("partial-likelihood gradient vanishes at zero for balanced strata") {
  // each stratum's event-set covariate mean equals its risk-set mean
  const SurvivalDataset ds = oracle::make_dataset(
      {1, 1, 2, 2}, {1, 1, 0, 0}, {{0.0}, {1.0}, {0.0}, {1.0}}, 1, 2);
  StratifiedPartialLikelihood obj(ds, 1, TieMethod::breslow);
  std::vector<double> g(1);
  obj.gradient(std::vector<double>{0.0}, g);
  CHECK(std::fabs(g[0]) < 1e-14);

  StratifiedPartialLikelihood efron(ds, 1, TieMethod::efron);
  efron.gradient(std::vector<double>{0.0}, g);
  CHECK(std::fabs(g[0]) < 1e-14);
}

TEST_CASE("two opposing strata match a bisection oracle on the score") {
  // stratum t=1 risk set: {2 (event), 0, 0, 1}; stratum t=2 risk set:
  // {0 (event), 1}; the score has an interior root solvable independently
  const SurvivalDataset ds = oracle::make_dataset(
      {1, 1, 2, 2}, {1, 0, 1, 0}, {{2.0}, {0.0}, {0.0}, {1.0}}, 1, 2);
  const dtsurv::BetaFit fit = dtsurv::fit_beta(ds, 1);

  auto score = [](double b) {
    const double e2b = std::exp(2.0 * b);
    const double eb = std::exp(b);
    const double s1 = 2.0 - (2.0 * e2b + eb) / (e2b + 2.0 + eb);
    const double s2 = 0.0 - eb / (1.0 + eb);
    return -(s1 + s2);  // negated so the residual is increasing for bisect
  };
  const double want = oracle::bisect(score, -10.0, 10.0, 1e-12);
  CHECK(fit.beta[0] == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("a single event with no finite maximizer triggers the separation guard") {
  // the supremum sits at +infinity; a tight tolerance walks the iterates past
  // the divergence bound before the gradient can pass for converged
  const SurvivalDataset ds =
      oracle::make_dataset({1, 1}, {1, 0}, {{1.0}, {0.0}}, 1, 1);
  CHECK_THROWS_AS(dtsurv::fit_beta(ds, 1, {}, 1e-14, 200), dtsurv::SeparationError);
}

TEST_CASE("efron and breslow coincide when every stratum has one event") {
  // built so each (t) stratum carries exactly one type-1 event
  std::vector<int> x, j;
  std::vector<std::vector<double>> z;
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int t = 1; t <= 4; ++t) {
    x.push_back(t);
    j.push_back(1);
    z.push_back({dist(rng)});
    for (int extra = 0; extra < 6; ++extra) {
      x.push_back(t);
      j.push_back(0);
      z.push_back({dist(rng)});
    }
  }
  const SurvivalDataset ds = oracle::make_dataset(x, j, z, 1, 4);
  const dtsurv::BetaFit efron = dtsurv::fit_beta(ds, 1, {}, 1e-8, 100, TieMethod::efron);
  const dtsurv::BetaFit breslow = dtsurv::fit_beta(ds, 1, {}, 1e-8, 100, TieMethod::breslow);
  CHECK(efron.beta[0] == doctest::Approx(breslow.beta[0]).epsilon(1e-9));
}

TEST_CASE("partial-likelihood gradients agree with finite differences") {
  const SurvivalDataset ds = small_simulated(400, 5, 29);
  for (TieMethod ties : {TieMethod::efron, TieMethod::breslow}) {
    StratifiedPartialLikelihood obj(ds, 1, ties);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> point(obj.dim());
    for (double& v : point) v = dist(rng);
    CHECK(dtsurv::finite_difference_check(obj, point, 1e-5) < 1e-6);
  }
}

TEST_CASE("gradient at the solution is tiny and the SE matches a numeric Hessian") {
  const SurvivalDataset ds = small_simulated(1200, 6, 37);
  const dtsurv::BetaFit fit = dtsurv::fit_beta(ds, 1);
  StratifiedPartialLikelihood obj(ds, 1, TieMethod::efron);

  std::vector<double> g(5);
  obj.gradient(fit.beta, g);
  for (double v : g) CHECK(std::fabs(v) <= 1e-8);

  // numeric Hessian via central differences of the analytic gradient
  const double h = 1e-5;
  dtsurv::Matrix num(5, 5);
  std::vector<double> gp(5), gm(5), point = fit.beta;
  for (int k = 0; k < 5; ++k) {
    point[k] = fit.beta[k] + h;
    obj.gradient(point, gp);
    point[k] = fit.beta[k] - h;
    obj.gradient(point, gm);
    point[k] = fit.beta[k];
    for (int a = 0; a < 5; ++a) num(a, k) = -(gp[a] - gm[a]) / (2 * h);
  }
  const dtsurv::Matrix cov = dtsurv::spd_inverse(num);
  REQUIRE_FALSE(cov.empty());
  for (int k = 0; k < 5; ++k)
    CHECK(std::sqrt(fit.covariance(k, k)) ==
          doctest::Approx(std::sqrt(cov(k, k))).epsilon(1e-4));
}

TEST_CASE("fit_alpha") {
  SUBCASE("zero coefficients give the marginal logits exactly") {
    const SurvivalDataset ds = small_simulated(600, 4, 41);
    const std::vector<double> alpha = dtsurv::fit_alpha(ds, 1, std::vector<double>(5, 0.0));
    const dtsurv::EventTable table = dtsurv::event_table(ds);
    for (int t0 = 0; t0 < 4; ++t0) {
      const double q = static_cast<double>(table.event_count(t0, 0)) /
                       static_cast<double>(table.at_risk[t0]);
      CHECK(std::fabs(alpha[t0] - oracle::logit(q)) <= 1e-9);
    }
  }
  SUBCASE("solutions satisfy the observed-proportion equation") {
    const SurvivalDataset ds = small_simulated(700, 5, 43);
    const dtsurv::BetaFit fit = dtsurv::fit_beta(ds, 2);
    const std::vector<double> alpha = dtsurv::fit_alpha(ds, 2, fit.beta);
    const dtsurv::EventTable table = dtsurv::event_table(ds);
    for (int t = 1; t <= 5; ++t) {
      double expected = 0.0;
      for (const dtsurv::Observation& o : ds.observations) {
        if (o.x < t) continue;
        double lin = alpha[t - 1];
        for (int k = 0; k < 5; ++k) lin += o.z[k] * fit.beta[k];
        expected += oracle::expit(lin);
      }
      const double resid = expected / static_cast<double>(table.at_risk[t - 1]) -
                           static_cast<double>(table.event_count(t - 1, 1)) /
                               static_cast<double>(table.at_risk[t - 1]);
      CHECK(std::fabs(resid) <= 1e-9);
    }
  }
  SUBCASE("matches brute-force minimization of the squared-distance objective") {
    const SurvivalDataset ds = small_simulated(60, 3, 47, 0.3);
    REQUIRE(dtsurv::validate_counts(ds, 1).ok);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-0.8, 0.8);
    std::vector<double> beta(5);
    for (double& b : beta) b = dist(rng);
    const std::vector<double> alpha = dtsurv::fit_alpha(ds, 1, beta);
    const dtsurv::EventTable table = dtsurv::event_table(ds);

    for (int t = 1; t <= 3; ++t) {
      const double y_t = static_cast<double>(table.at_risk[t - 1]);
      const double target = static_cast<double>(table.event_count(t - 1, 0)) / y_t;
      auto objective = [&](double a) {
        double mean = 0.0;
        for (const dtsurv::Observation& o : ds.observations) {
          if (o.x < t) continue;
          double lin = a;
          for (int k = 0; k < 5; ++k) lin += o.z[k] * beta[k];
          mean += oracle::expit(lin);
        }
        mean /= y_t;
        return (mean - target) * (mean - target);
      };
      // exhaustive scan at 1e-2 over [-20, 20], then 1e-4 near the coarse
      // minimum (the objective is unimodal, so the two-level scan is exact)
      double best = 1e300, arg = 0.0;
      for (int i = -2000; i <= 2000; ++i) {
        const double a = i * 1e-2;
        const double v = objective(a);
        if (v < best) {
          best = v;
          arg = a;
        }
      }
      double best2 = 1e300, arg2 = arg;
      for (int i = -220; i <= 220; ++i) {
        const double a = arg + i * 1e-4;
        const double v = objective(a);
        if (v < best2) {
          best2 = v;
          arg2 = a;
        }
      }
      CHECK(std::fabs(alpha[t - 1] - arg2) <= 1e-3);
    }
  }
  SUBCASE("boundary cells are hard errors naming the cell") {
    // no type-1 event at t = 2
    const SurvivalDataset ds = oracle::make_dataset(
        {1, 1, 2, 2, 2}, {1, 1, 0, 0, 0}, {{0.0}, {0.4}, {0.8}, {0.2}, {0.6}}, 1, 2);
    try {
      dtsurv::fit_alpha(ds, 1, std::vector<double>{0.0});
      FAIL("expected BoundaryError");
    } catch (const dtsurv::BoundaryError& e) {
      CHECK(e.event_type() == 1);
      CHECK(e.time_index() == 2);
    }
    // everyone fails at t = 1
    const SurvivalDataset all_fail =
        oracle::make_dataset({1, 1}, {1, 1}, {{0.2}, {0.6}}, 1, 1);
    CHECK_THROWS_AS(dtsurv::fit_alpha(all_fail, 1, std::vector<double>{0.0}),
                    dtsurv::BoundaryError);
  }
}

TEST_CASE("step decoupling: early-time perturbations leave later intercepts fixed") {
  SurvivalDataset ds = small_simulated(500, 5, 53);
  std::vector<double> beta{0.2, -0.4, 0.1, 0.3, -0.2};
  const std::vector<double> alpha = dtsurv::fit_alpha(ds, 1, beta);

  // scramble covariates and event types of subjects exiting before t = 4;
  // risk sets at t >= 4 are untouched
  SurvivalDataset perturbed = ds;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (dtsurv::Observation& o : perturbed.observations) {
    if (o.x >= 4) continue;
    for (double& v : o.z) v = dist(rng);
    if (o.j != 0) o.j = 1 + static_cast<int>(rng() % 2);
  }
  // keep every (j,t) cell estimable for the call
  if (!dtsurv::validate_counts(perturbed, 1).ok) return;
  const std::vector<double> alpha2 = dtsurv::fit_alpha(perturbed, 1, beta);
  CHECK(std::fabs(alpha[3] - alpha2[3]) <= 1e-12);
  CHECK(std::fabs(alpha[4] - alpha2[4]) <= 1e-12);
}

TEST_CASE("with zero coefficients both methods produce the marginal logits") {
  SurvivalDataset ds = small_simulated(400, 3, 59);
  // drop the covariates entirely
  SurvivalDataset bare = ds;
  bare.covariate_names.clear();
  for (dtsurv::Observation& o : bare.observations) o.z.clear();

  const FittedModel expansion = dtsurv::fit_expansion(bare);
  const FittedModel two_stage = dtsurv::fit_two_stage(bare);
  const dtsurv::EventTable table = dtsurv::event_table(bare);
  for (int j = 0; j < 2; ++j)
    for (int t0 = 0; t0 < 3; ++t0) {
      const double want = oracle::logit(static_cast<double>(table.event_count(t0, j)) /
                                        static_cast<double>(table.at_risk[t0]));
      CHECK(std::fabs(expansion.params.alpha_at(j, t0) - want) <= 1e-9);
      CHECK(std::fabs(two_stage.params.alpha_at(j, t0) - want) <= 1e-9);
    }
  CHECK_FALSE(two_stage.has_alpha_se());
  CHECK(two_stage.method == "two-stage");
}

TEST_CASE("scale equivariance") {
  const SurvivalDataset ds = small_simulated(900, 4, 61);
  const FittedModel base = dtsurv::fit_two_stage(ds);

  SurvivalDataset scaled = ds;
  const double c = 4.0;
  for (dtsurv::Observation& o : scaled.observations) o.z[2] *= c;
  const FittedModel rescaled = dtsurv::fit_two_stage(scaled);

  for (int j = 0; j < 2; ++j) {
    CHECK(rescaled.params.beta_at(j, 2) ==
          doctest::Approx(base.params.beta_at(j, 2) / c).epsilon(1e-8));
    for (int t = 0; t < 4; ++t)
      CHECK(rescaled.params.alpha_at(j, t) ==
            doctest::Approx(base.params.alpha_at(j, t)).epsilon(1e-8));
  }
  // fitted hazards are invariant
  for (int i = 0; i < 20; ++i) {
    const dtsurv::Observation& o = ds.observations[i];
    const dtsurv::Observation& os = scaled.observations[i];
    for (int j = 1; j <= 2; ++j)
      for (int t = 1; t <= 4; ++t)
        CHECK(dtsurv::hazard(base.params, j, t, o.z) ==
              doctest::Approx(dtsurv::hazard(rescaled.params, j, t, os.z)).epsilon(1e-8));
  }
}

TEST_CASE("full fit: degenerate single time point") {
  // M = 1, d = 1, one covariate: a single stratum plus one solved intercept
  std::vector<int> x, j;
  std::vector<std::vector<double>> z;
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    x.push_back(1);
    const double zi = dist(rng);
    j.push_back(dist(rng) < oracle::expit(-0.5 + zi) ? 1 : 0);
    z.push_back({zi});
  }
  const SurvivalDataset ds = oracle::make_dataset(x, j, z, 1, 1);
  const FittedModel fitted = dtsurv::fit_two_stage(ds);
  CHECK(fitted.params.alpha.size() == 1);
  CHECK(fitted.params.beta.size() == 1);
  CHECK(std::isfinite(fitted.params.alpha_at(0, 0)));
  CHECK(dtsurv::get_beta_se(fitted)(0, 0) > 0.0);
}

TEST_CASE("methods agree at moderate scale") {
  const SurvivalDataset ds = small_simulated(8000, 10, 71, 0.8);
  const FittedModel expansion = dtsurv::fit_expansion(ds);
  const FittedModel two_stage = dtsurv::fit_two_stage(ds);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 5; ++k) {
      CHECK(std::fabs(expansion.params.beta_at(j, k) - two_stage.params.beta_at(j, k)) <= 0.08);
      CHECK(two_stage.beta_se(j, k) ==
            doctest::Approx(expansion.beta_se(j, k)).epsilon(0.10));
      CHECK(two_stage.beta_se(j, k) > 0.0);
    }
  // parallel execution reproduces the sequential fit
  TwoStageFitOptions options;
  options.parallel = true;
  const FittedModel par = dtsurv::fit_two_stage(ds, options);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 5; ++k)
      CHECK(par.params.beta_at(j, k) == two_stage.params.beta_at(j, k));
}
