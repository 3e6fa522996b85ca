#pragma once

#include <cstdint>
#include <string>

#include "dtsurv/dataset.hpp"
#include "dtsurv/fitted_model.hpp"
#include "dtsurv/simulation.hpp"

namespace dtsurv {

// Fitted-model persistence. The JSON document carries everything predict
// needs: method tag, grid labels, covariate names, parameter matrices and
// standard errors, serialized losslessly for exact round-trips.
void save_model_json(const FittedModel& fitted, const std::string& path);
FittedModel load_model_json(const std::string& path);

// Coefficient table: columns event, parameter, estimate, se, z, p. Rows
// without standard errors leave se/z/p empty (CSV) or null (JSON).
void write_coefficient_csv(const CoefficientTable& table, const std::string& path);
void write_coefficient_json(const CoefficientTable& table, const std::string& path);

// Event/censoring counts per time point; a trailing "beyond" row reports
// subjects censored past the grid when any exist.
void write_event_table_csv(const EventTable& table, const std::string& path);

// Long-format prediction output: one row per (observation, time point).
void write_curve_table_csv(const CurveTable& table, const std::string& path);

// Simulation scenario document: coefficients, censoring, covariate rule name
// and default seed.
struct SimulationConfig {
  CoefficientSpec coefficients;
  CensoringSpec censoring;
  std::string covariate_rule = "uniform01";
  std::uint64_t seed = 0;
};

void save_simulation_config(const SimulationConfig& config, const std::string& path);
SimulationConfig load_simulation_config(const std::string& path);

}  // namespace dtsurv
