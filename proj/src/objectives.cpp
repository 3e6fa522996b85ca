#include "dtsurv/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dtsurv/kernels.hpp"

namespace dtsurv {

namespace {
constexpr std::size_t kBlockRows = 256;
}

// ---------------------------------------------------------------------------
// CollapsedLikelihood
// ---------------------------------------------------------------------------

CollapsedLikelihood::CollapsedLikelihood(const ExpandedDataset& expanded, int cause)
    : d_(expanded.source->d()),
      p_(expanded.source->p()),
      q_(d_ + p_),
      n_rows_(expanded.rows.size()) {
  tidx_.resize(n_rows_);
  y_.resize(n_rows_);
  z_.resize(n_rows_ * static_cast<std::size_t>(p_));
  for (std::size_t r = 0; r < n_rows_; ++r) {
    const ExpandedDataset::Row& row = expanded.rows[r];
    tidx_[r] = row.t - 1;
    y_[r] = row.outcome == cause ? 1.0 : 0.0;
    std::span<const double> z = expanded.z_of(row);
    std::copy(z.begin(), z.end(), z_.begin() + r * static_cast<std::size_t>(p_));
  }
  xblk_.resize(kBlockRows * static_cast<std::size_t>(q_));
  eta_.resize(kBlockRows);
  mu_.resize(kBlockRows);
}

double CollapsedLikelihood::value(std::span<const double> x) const { return pass(x, {}, nullptr); }

void CollapsedLikelihood::gradient(std::span<const double> x, std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
  pass(x, g, nullptr);
}

void CollapsedLikelihood::hessian(std::span<const double> x, Matrix& h) const {
  std::vector<double> g(q_);
  h = Matrix(q_, q_, 0.0);
  pass(x, g, &h);
  symmetrize_from_lower(h);
}

double CollapsedLikelihood::eval(std::span<const double> x, std::span<double> g, Matrix& h) const {
  std::fill(g.begin(), g.end(), 0.0);
  h = Matrix(q_, q_, 0.0);
  const double ll = pass(x, g, &h);
  symmetrize_from_lower(h);
  return ll;
}

double CollapsedLikelihood::pass(std::span<const double> theta, std::span<double> g,
                                 Matrix* h) const {
  const kernels::Ops& K = kernels::active();
  const bool derivs = !g.empty() || h != nullptr;
  double ll = 0.0;
  for (std::size_t start = 0; start < n_rows_; start += kBlockRows) {
    const std::size_t bn = std::min(kBlockRows, n_rows_ - start);
    for (std::size_t r = 0; r < bn; ++r) {
      double* xr = xblk_.data() + r * q_;
      std::fill(xr, xr + q_, 0.0);
      xr[tidx_[start + r]] = 1.0;
      const double* zr = z_.data() + (start + r) * static_cast<std::size_t>(p_);
      std::copy(zr, zr + p_, xr + d_);
      eta_[r] = K.dot(xr, theta.data(), q_);
    }
    ll += K.bernoulli_loglik(eta_.data(), y_.data() + start, bn);
    if (derivs) {
      K.expit_array(eta_.data(), mu_.data(), bn);
      for (std::size_t r = 0; r < bn; ++r) {
        const double* xr = xblk_.data() + r * q_;
        const double mu = mu_[r];
        if (!g.empty()) K.axpy(y_[start + r] - mu, xr, g.data(), q_);
        if (h != nullptr) K.syr_lower(-mu * (1.0 - mu), xr, q_, h->data(), q_);
      }
    }
  }
  return ll;
}

// ---------------------------------------------------------------------------
// StratifiedPartialLikelihood
// ---------------------------------------------------------------------------

StratifiedPartialLikelihood::StratifiedPartialLikelihood(const SurvivalDataset& ds, int cause,
                                                         TieMethod ties)
    : n_(ds.n()), d_(ds.d()), p_(ds.p()), ties_(ties) {
  std::vector<int> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ds.observations[a].x > ds.observations[b].x;
  });

  x_sorted_.resize(n_);
  z_columns_.resize(static_cast<std::size_t>(p_) * n_);
  event_flag_.assign(n_, 0);
  n_events_.assign(d_, 0);
  grand_z_sum_.assign(p_, 0.0);
  for (int pos = 0; pos < n_; ++pos) {
    const Observation& o = ds.observations[order[pos]];
    x_sorted_[pos] = o.x;
    for (int k = 0; k < p_; ++k) z_columns_[static_cast<std::size_t>(k) * n_ + pos] = o.z[k];
    if (o.j == cause && o.x <= d_) {
      event_flag_[pos] = 1;
      ++n_events_[o.x - 1];
      for (int k = 0; k < p_; ++k) grand_z_sum_[k] += o.z[k];
    }
  }
  s_.resize(n_);
  e_.resize(n_);
}

double StratifiedPartialLikelihood::value(std::span<const double> x) const {
  return sweep(x, {}, nullptr);
}

void StratifiedPartialLikelihood::gradient(std::span<const double> x, std::span<double> g) const {
  sweep(x, g, nullptr);
}

void StratifiedPartialLikelihood::hessian(std::span<const double> x, Matrix& h) const {
  std::vector<double> g(p_);
  sweep(x, g, &h);
}

double StratifiedPartialLikelihood::eval(std::span<const double> x, std::span<double> g,
                                         Matrix& h) const {
  return sweep(x, g, &h);
}

double StratifiedPartialLikelihood::sweep(std::span<const double> beta, std::span<double> g,
                                          Matrix* h) const {
  const kernels::Ops& K = kernels::active();

  std::fill(s_.begin(), s_.end(), 0.0);
  for (int k = 0; k < p_; ++k)
    K.axpy(beta[k], z_columns_.data() + static_cast<std::size_t>(k) * n_, s_.data(), n_);

  // center the linear predictors; the partial likelihood is invariant and the
  // exponentials stay bounded during line-search excursions
  double shift = 0.0;
  for (int i = 0; i < n_; ++i) shift = std::max(shift, s_[i]);
  for (int i = 0; i < n_; ++i) s_[i] -= shift;
  K.exp_array(s_.data(), e_.data(), n_);

  const bool want_grad = !g.empty();
  const bool want_any = want_grad || h != nullptr;
  if (want_grad) std::fill(g.begin(), g.end(), 0.0);
  if (h != nullptr) *h = Matrix(p_, p_, 0.0);

  double ll = 0.0;
  double s0 = 0.0;
  std::vector<double> s1(p_, 0.0);
  Matrix s2(p_, p_, 0.0);
  std::vector<double> s1d(p_, 0.0);
  Matrix s2d(p_, p_, 0.0);
  std::vector<double> zi(p_);
  std::vector<double> u(p_);

  int idx = 0;
  for (int t = d_; t >= 1; --t) {
    double s0d = 0.0;
    if (want_any) {
      std::fill(s1d.begin(), s1d.end(), 0.0);
      s2d.fill(0.0);
    }
    while (idx < n_ && x_sorted_[idx] >= t) {
      const double w = e_[idx];
      const bool is_event = event_flag_[idx] != 0 && x_sorted_[idx] == t;
      s0 += w;
      if (is_event) s0d += w;
      if (want_any) {
        for (int k = 0; k < p_; ++k) zi[k] = z_at(idx, k);
        K.axpy(w, zi.data(), s1.data(), p_);
        if (h != nullptr) K.syr_lower(w, zi.data(), p_, s2.data(), p_);
        if (is_event) {
          K.axpy(w, zi.data(), s1d.data(), p_);
          if (h != nullptr) K.syr_lower(w, zi.data(), p_, s2d.data(), p_);
        }
      }
      ++idx;
    }
    const std::int64_t events = n_events_[t - 1];
    if (events == 0) continue;

    const int terms = ties_ == TieMethod::efron ? static_cast<int>(events) : 1;
    const double weight = ties_ == TieMethod::efron ? 1.0 : static_cast<double>(events);
    for (int l = 0; l < terms; ++l) {
      const double c =
          ties_ == TieMethod::efron ? static_cast<double>(l) / static_cast<double>(events) : 0.0;
      const double denom = s0 - c * s0d;
      ll -= weight * (std::log(denom) + shift);
      if (want_any) {
        for (int k = 0; k < p_; ++k) u[k] = (s1[k] - c * s1d[k]) / denom;
        if (want_grad)
          for (int k = 0; k < p_; ++k) g[k] -= weight * u[k];
        if (h != nullptr)
          for (int a = 0; a < p_; ++a)
            for (int b = 0; b <= a; ++b)
              (*h)(a, b) -= weight * ((s2(a, b) - c * s2d(a, b)) / denom - u[a] * u[b]);
      }
    }
  }

  ll += K.dot(grand_z_sum_.data(), beta.data(), p_);
  if (want_grad)
    for (int k = 0; k < p_; ++k) g[k] += grand_z_sum_[k];
  if (h != nullptr) symmetrize_from_lower(*h);
  return ll;
}

}  // namespace dtsurv
