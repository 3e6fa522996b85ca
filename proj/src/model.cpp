#include "dtsurv/model.hpp"

#include <cmath>
#include <string>

#include "dtsurv/errors.hpp"
#include "dtsurv/kernels.hpp"

namespace dtsurv {

namespace {

void check_z(const ModelParams& params, std::span<const double> z) {
  if (static_cast<int>(z.size()) != params.p)
    throw ArgumentError("covariate vector has length " + std::to_string(z.size()) +
                        ", model expects " + std::to_string(params.p));
  for (double v : z)
    if (!std::isfinite(v)) throw ArgumentError("covariate vector contains a non-finite value");
}

void check_jt(const ModelParams& params, int j, int t) {
  if (j < 1 || j > params.M)
    throw ArgumentError("event type " + std::to_string(j) + " out of range 1.." +
                        std::to_string(params.M));
  if (t < 1 || t > params.d)
    throw ArgumentError("time index " + std::to_string(t) + " out of range 1.." +
                        std::to_string(params.d));
}

// hazards for all event types at time t (0-based internally)
void hazards_at(const ModelParams& params, int t0, const std::vector<double>& zbeta,
                std::vector<double>& out) {
  for (int j = 0; j < params.M; ++j)
    out[j] = kernels::expit(params.alpha_at(j, t0) + zbeta[j]);
}

std::vector<double> zbeta_all(const ModelParams& params, std::span<const double> z) {
  std::vector<double> zb(params.M, 0.0);
  for (int j = 0; j < params.M; ++j)
    zb[j] = kernels::active().dot(z.data(), params.beta.data() + static_cast<std::size_t>(j) * params.p,
                                  z.size());
  return zb;
}

}  // namespace

TimeGrid TimeGrid::numeric(int d) {
  TimeGrid g;
  g.d = d;
  g.labels.reserve(d);
  for (int t = 1; t <= d; ++t) g.labels.push_back(std::to_string(t));
  return g;
}

void TimeGrid::validate() const {
  if (d < 1) throw ArgumentError("time grid must have at least one point");
  if (static_cast<int>(labels.size()) != d)
    throw ArgumentError("time grid has " + std::to_string(labels.size()) + " labels for d = " +
                        std::to_string(d));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t k = i + 1; k < labels.size(); ++k)
      if (labels[i] == labels[k]) throw ArgumentError("duplicate time label '" + labels[i] + "'");
}

void ModelParams::validate() const {
  if (M < 1 || d < 1 || p < 0) throw ArgumentError("invalid model dimensions");
  if (alpha.size() != static_cast<std::size_t>(M) * d ||
      beta.size() != static_cast<std::size_t>(M) * p)
    throw ArgumentError("parameter storage does not match model dimensions");
  for (double v : alpha)
    if (!std::isfinite(v)) throw ArgumentError("non-finite intercept");
  for (double v : beta)
    if (!std::isfinite(v)) throw ArgumentError("non-finite coefficient");
}

double hazard(const ModelParams& params, int j, int t, std::span<const double> z) {
  check_jt(params, j, t);
  check_z(params, z);
  const double lin = params.alpha_at(j - 1, t - 1) +
                     kernels::active().dot(z.data(), params.beta.data() + static_cast<std::size_t>(j - 1) * params.p, z.size());
  return kernels::expit(lin);
}

std::vector<double> overall_survival(const ModelParams& params, std::span<const double> z) {
  check_z(params, z);
  std::vector<double> zb = zbeta_all(params, z);
  std::vector<double> lam(params.M);
  std::vector<double> s(params.d + 1);
  s[0] = 1.0;
  for (int t0 = 0; t0 < params.d; ++t0) {
    hazards_at(params, t0, zb, lam);
    double total = 0.0;
    for (double l : lam) total += l;
    if (total >= 1.0)
      throw AdmissibilityError("hazards sum to " + std::to_string(total) + " >= 1 at t = " +
                               std::to_string(t0 + 1),
                               t0 + 1);
    s[t0 + 1] = s[t0] * (1.0 - total);
  }
  return s;
}

std::vector<double> event_probability(const ModelParams& params, int j, std::span<const double> z) {
  check_jt(params, j, 1);
  check_z(params, z);
  std::vector<double> zb = zbeta_all(params, z);
  std::vector<double> lam(params.M);
  std::vector<double> prob(params.d);
  double surv = 1.0;
  for (int t0 = 0; t0 < params.d; ++t0) {
    hazards_at(params, t0, zb, lam);
    double total = 0.0;
    for (double l : lam) total += l;
    if (total >= 1.0)
      throw AdmissibilityError("hazards sum to " + std::to_string(total) + " >= 1 at t = " +
                               std::to_string(t0 + 1),
                               t0 + 1);
    prob[t0] = lam[j - 1] * surv;
    surv *= 1.0 - total;
  }
  return prob;
}

std::vector<double> cif(const ModelParams& params, int j, std::span<const double> z) {
  std::vector<double> f = event_probability(params, j, z);
  for (std::size_t t = 1; t < f.size(); ++t) f[t] += f[t - 1];
  return f;
}

double marginal_event_probability(const ModelParams& params, int j, std::span<const double> z) {
  std::vector<double> f = cif(params, j, z);
  return f.back();
}

CurveTable predict_curves(const ModelParams& params, const TimeGrid& grid,
                          const std::vector<std::vector<double>>& newdata,
                          const std::vector<std::string>* ids) {
  params.validate();
  grid.validate();
  if (grid.d != params.d) throw ArgumentError("time grid does not match model dimensions");
  if (ids != nullptr && ids->size() != newdata.size())
    throw ArgumentError("id list does not match the number of observations");

  CurveTable table;
  table.M = params.M;
  table.time_labels = grid.labels;
  table.rows.reserve(newdata.size() * static_cast<std::size_t>(params.d));

  std::vector<double> lam(params.M);
  for (std::size_t i = 0; i < newdata.size(); ++i) {
    std::span<const double> z(newdata[i]);
    check_z(params, z);
    std::vector<double> zb = zbeta_all(params, z);
    std::string id = ids != nullptr ? (*ids)[i] : std::to_string(i);

    double surv = 1.0;
    std::vector<double> cum(params.M, 0.0);
    for (int t0 = 0; t0 < params.d; ++t0) {
      hazards_at(params, t0, zb, lam);
      double total = 0.0;
      for (double l : lam) total += l;
      if (total >= 1.0)
        throw AdmissibilityError("hazards sum to " + std::to_string(total) + " >= 1 at t = " +
                                 std::to_string(t0 + 1),
                                 t0 + 1);
      CurveTable::Row row;
      row.id = id;
      row.t = t0 + 1;
      row.hazard = lam;
      row.event_prob.resize(params.M);
      row.cif.resize(params.M);
      for (int j = 0; j < params.M; ++j) {
        row.event_prob[j] = lam[j] * surv;
        cum[j] += row.event_prob[j];
        row.cif[j] = cum[j];
      }
      surv *= 1.0 - total;
      row.survival = surv;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace dtsurv
