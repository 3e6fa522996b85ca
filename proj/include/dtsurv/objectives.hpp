#pragma once

#include <cstdint>
#include <vector>

#include "dtsurv/dataset.hpp"
#include "dtsurv/optim.hpp"

namespace dtsurv {

// Collapsed binary log-likelihood for one event type on person-period data:
//   sum_rows [ y log mu + (1 - y) log(1 - mu) ],  mu = expit(alpha_t + z.beta)
// with y = (outcome == cause). Parameter layout: d time-level intercepts
// followed by p covariate coefficients; there is no global intercept.
//
// Rows stream through in blocks; each row materializes its dense (d + p)
// design vector (one-hot time indicator plus covariates), which is the
// repeated-binary-outcome GLM the expansion method prescribes.
class CollapsedLikelihood final : public SmoothObjective {
 public:
  CollapsedLikelihood(const ExpandedDataset& expanded, int cause);

  int time_points() const { return d_; }
  int covariates() const { return p_; }

  int dim() const override { return q_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  void hessian(std::span<const double> x, Matrix& h) const override;
  double eval(std::span<const double> x, std::span<double> g, Matrix& h) const override;

 private:
  double pass(std::span<const double> theta, std::span<double> g, Matrix* h) const;

  int d_, p_, q_;
  std::size_t n_rows_;
  std::vector<int32_t> tidx_;
  std::vector<double> y_;
  std::vector<double> z_;  // row-major person-period covariates

  mutable std::vector<double> xblk_;
  mutable std::vector<double> eta_;
  mutable std::vector<double> mu_;
};

// Tie convention for the stratified partial likelihood. Every stratum here is
// fully tied (all events of a stratum share its time point), which makes the
// choice material: Breslow attenuates coefficients noticeably once the
// per-stratum event fraction reaches a few percent, Efron stays close to the
// exact conditional likelihood.
enum class TieMethod { efron, breslow };

// Partial log-likelihood for one event type, stratified on the discrete event
// time so the time intercepts drop out:
//   Breslow: sum_t [ sum_{D_tj} z.beta - n_tj log sum_{R_t} e^{z.beta} ]
//   Efron:   the n_tj tied events progressively discount the event-set mass.
// Subjects are held in risk order (time descending) so one sweep with nested
// risk sets evaluates every stratum.
class StratifiedPartialLikelihood final : public SmoothObjective {
 public:
  StratifiedPartialLikelihood(const SurvivalDataset& ds, int cause,
                              TieMethod ties = TieMethod::efron);

  std::int64_t events_at(int t0) const { return n_events_[t0]; }

  int dim() const override { return p_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  void hessian(std::span<const double> x, Matrix& h) const override;
  double eval(std::span<const double> x, std::span<double> g, Matrix& h) const override;

 private:
  double sweep(std::span<const double> beta, std::span<double> g, Matrix* h) const;
  double z_at(int pos, int k) const { return z_columns_[static_cast<std::size_t>(k) * n_ + pos]; }

  int n_, d_, p_;
  TieMethod ties_;
  std::vector<int> x_sorted_;
  std::vector<double> z_columns_;  // p columns of length n, risk order
  std::vector<char> event_flag_;
  std::vector<std::int64_t> n_events_;
  std::vector<double> grand_z_sum_;

  mutable std::vector<double> s_;
  mutable std::vector<double> e_;
};

}  // namespace dtsurv
