#include "dtsurv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dtsurv/errors.hpp"

namespace dtsurv {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_to_json(const double* data, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(data[static_cast<std::size_t>(r) * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> matrix_from_json(const json& j, int rows, int cols, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw DataError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (const json& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw DataError(std::string(what) + ": expected rows of length " + std::to_string(cols));
    for (const json& v : row) out.push_back(v.get<double>());
  }
  return out;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed while writing '" + path + "'");
}

}  // namespace

void save_model_json(const FittedModel& fitted, const std::string& path) {
  const ModelParams& params = fitted.params;
  json j;
  j["method"] = fitted.method;
  j["M"] = params.M;
  j["d"] = params.d;
  j["p"] = params.p;
  j["time_labels"] = fitted.grid.labels;
  j["covariates"] = fitted.covariate_names;
  j["alpha"] = matrix_to_json(params.alpha.data(), params.M, params.d);
  j["beta"] = matrix_to_json(params.beta.data(), params.M, params.p);
  j["alpha_se"] =
      fitted.has_alpha_se() ? matrix_to_json(fitted.alpha_se.data(), params.M, params.d) : json();
  j["beta_se"] = matrix_to_json(fitted.beta_se.data(), params.M, params.p);
  j["loglik"] = fitted.loglik;
  j["iterations"] = fitted.iterations;
  json conv = json::array();
  for (char c : fitted.converged) conv.push_back(c != 0);
  j["converged"] = std::move(conv);
  write_json_file(j, path);
}

FittedModel load_model_json(const std::string& path) {
  const json j = load_json_file(path);
  FittedModel fitted;
  try {
    const int M = j.at("M").get<int>();
    const int d = j.at("d").get<int>();
    const int p = j.at("p").get<int>();
    fitted.method = j.at("method").get<std::string>();
    fitted.grid.d = d;
    fitted.grid.labels = j.at("time_labels").get<std::vector<std::string>>();
    fitted.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    fitted.params = ModelParams(M, d, p);
    fitted.params.alpha = matrix_from_json(j.at("alpha"), M, d, "alpha");
    fitted.params.beta = matrix_from_json(j.at("beta"), M, p, "beta");
    if (!j.at("alpha_se").is_null()) {
      fitted.alpha_se = Matrix(M, d);
      std::vector<double> v = matrix_from_json(j.at("alpha_se"), M, d, "alpha_se");
      std::copy(v.begin(), v.end(), fitted.alpha_se.data());
    }
    fitted.beta_se = Matrix(M, p);
    std::vector<double> v = matrix_from_json(j.at("beta_se"), M, p, "beta_se");
    std::copy(v.begin(), v.end(), fitted.beta_se.data());
    if (j.contains("loglik")) fitted.loglik = j.at("loglik").get<std::vector<double>>();
    if (j.contains("iterations")) fitted.iterations = j.at("iterations").get<std::vector<int>>();
    if (j.contains("converged"))
      for (bool b : j.at("converged")) fitted.converged.push_back(b ? 1 : 0);
  } catch (const json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  fitted.params.validate();
  fitted.grid.validate();
  return fitted;
}

void write_coefficient_csv(const CoefficientTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "event,parameter,estimate,se,z,p\n";
  for (const CoefficientTable::Row& row : table.rows) {
    out << row.event << ',' << row.parameter << ',' << format_double(row.estimate) << ',';
    if (row.has_se)
      out << format_double(row.se) << ',' << format_double(row.z) << ',' << format_double(row.p);
    else
      out << ",,";
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

void write_coefficient_json(const CoefficientTable& table, const std::string& path) {
  json rows = json::array();
  for (const CoefficientTable::Row& row : table.rows) {
    json r;
    r["event"] = row.event;
    r["parameter"] = row.parameter;
    r["estimate"] = row.estimate;
    if (row.has_se) {
      r["se"] = row.se;
      r["z"] = row.z;
      r["p"] = row.p;
    } else {
      r["se"] = nullptr;
      r["z"] = nullptr;
      r["p"] = nullptr;
    }
    rows.push_back(std::move(r));
  }
  write_json_file(rows, path);
}

void write_event_table_csv(const EventTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "time,at_risk";
  for (int j = 1; j <= table.M; ++j) out << ",events_j" << j;
  out << ",censored\n";
  for (std::size_t t0 = 0; t0 < table.labels.size(); ++t0) {
    out << table.labels[t0] << ',' << table.at_risk[t0];
    for (int j0 = 0; j0 < table.M; ++j0) out << ',' << table.event_count(static_cast<int>(t0), j0);
    out << ',' << table.censored[t0] << '\n';
  }
  if (table.censored_after_grid > 0) {
    out << "beyond," << table.censored_after_grid;
    for (int j0 = 0; j0 < table.M; ++j0) out << ",0";
    out << ',' << table.censored_after_grid << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

void write_curve_table_csv(const CurveTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "id,time";
  for (int j = 1; j <= table.M; ++j)
    out << ",hazard_j" << j << ",event_prob_j" << j << ",cif_j" << j;
  out << ",survival\n";
  for (const CurveTable::Row& row : table.rows) {
    out << row.id << ',' << table.time_labels[row.t - 1];
    for (int j0 = 0; j0 < table.M; ++j0)
      out << ',' << format_double(row.hazard[j0]) << ',' << format_double(row.event_prob[j0])
          << ',' << format_double(row.cif[j0]);
    out << ',' << format_double(row.survival) << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

void save_simulation_config(const SimulationConfig& config, const std::string& path) {
  config.coefficients.validate();
  config.censoring.validate();
  json j;
  j["M"] = config.coefficients.M;
  j["d"] = config.coefficients.d;
  j["p"] = config.coefficients.p;
  j["alpha"] = matrix_to_json(config.coefficients.alpha.data(), config.coefficients.M,
                              config.coefficients.d);
  j["beta"] = matrix_to_json(config.coefficients.beta.data(), config.coefficients.M,
                             config.coefficients.p);
  j["censoring"] = {
      {"kind", config.censoring.kind == CensoringSpec::Kind::none ? "none" : "uniform_discrete"},
      {"prob", config.censoring.censoring_prob}};
  j["covariate_rule"] = config.covariate_rule;
  j["seed"] = config.seed;
  write_json_file(j, path);
}

SimulationConfig load_simulation_config(const std::string& path) {
  const json j = load_json_file(path);
  SimulationConfig config;
  try {
    config.coefficients.M = j.at("M").get<int>();
    config.coefficients.d = j.at("d").get<int>();
    config.coefficients.p = j.at("p").get<int>();
    config.coefficients.alpha = matrix_from_json(j.at("alpha"), config.coefficients.M,
                                                 config.coefficients.d, "alpha");
    config.coefficients.beta =
        matrix_from_json(j.at("beta"), config.coefficients.M, config.coefficients.p, "beta");
    const json& cens = j.at("censoring");
    const std::string kind = cens.at("kind").get<std::string>();
    if (kind == "none")
      config.censoring.kind = CensoringSpec::Kind::none;
    else if (kind == "uniform_discrete")
      config.censoring.kind = CensoringSpec::Kind::uniform_discrete;
    else
      throw DataError("unknown censoring kind '" + kind + "'");
    config.censoring.censoring_prob = cens.at("prob").get<double>();
    if (j.contains("covariate_rule"))
      config.covariate_rule = j.at("covariate_rule").get<std::string>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  config.coefficients.validate();
  config.censoring.validate();
  return config;
}

}  // namespace dtsurv
