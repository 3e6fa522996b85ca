#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dtsurv/model.hpp"

namespace dtsurv {

// One subject: observed time x (1..d, or d+1 when censored beyond the grid),
// event type j (0 = censored), and baseline covariates.
struct Observation {
  std::string id;
  int x = 0;
  int j = 0;
  std::vector<double> z;
};

struct SurvivalDataset {
  std::vector<Observation> observations;
  std::vector<std::string> covariate_names;
  TimeGrid grid;
  int M = 1;

  int n() const { return static_cast<int>(observations.size()); }
  int p() const { return static_cast<int>(covariate_names.size()); }
  int d() const { return grid.d; }

  void validate() const;
};

// Column mapping for CSV ingestion. Header row is required; an empty covariate
// list means "every column not otherwise claimed, in header order". Event
// count M is inferred as the largest event code unless overridden.
struct CsvSchema {
  std::string id = "pid";
  std::string time = "X";
  std::string event = "J";
  std::vector<std::string> covariates;
  int event_types_override = 0;  // 0 = infer
};

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const SurvivalDataset& ds, const std::string& path, const CsvSchema& schema = {});

// Person-period records: subject i contributes one row per time point at risk
// (t = 1..min(x_i, d)). outcome is the categorical event code at that row:
// j on the row t = x_i of a subject with event type j, 0 everywhere else.
// Rows reference the source dataset instead of copying covariates.
struct ExpandedDataset {
  struct Row {
    int32_t subject;
    int32_t t;        // 1-based
    int32_t outcome;  // 0..M
  };

  const SurvivalDataset* source = nullptr;
  std::vector<Row> rows;

  const std::string& id_of(const Row& r) const { return source->observations[r.subject].id; }
  std::span<const double> z_of(const Row& r) const { return source->observations[r.subject].z; }
};

ExpandedDataset expand(const SurvivalDataset& ds);

// Risk-set and event counts by time: y_t subjects at risk, n_tj type-j events,
// censored_t censorings at t, plus the count censored beyond the grid.
struct EventTable {
  int M = 0;
  std::vector<std::string> labels;       // d entries
  std::vector<std::int64_t> at_risk;     // y_t
  std::vector<std::int64_t> events;      // d x M, row-major: n_tj
  std::vector<std::int64_t> censored;    // per t
  std::int64_t censored_after_grid = 0;  // x = d + 1

  std::int64_t event_count(int t0, int j0) const {
    return events[static_cast<std::size_t>(t0) * M + j0];
  }
};

EventTable event_table(const SurvivalDataset& ds);

// Replaces every x > upper with upper and shrinks the grid; the last label is
// rendered "<label>+".
SurvivalDataset clip_tail(const SurvivalDataset& ds, int upper);

// Remaps selected time points onto earlier ones (e.g. {7->6, 14->13}) and
// compacts the grid, merging labels ("6-7"). Chained mappings are rejected.
SurvivalDataset merge_times(const SurvivalDataset& ds, const std::map<int, int>& mapping);

// Cells (j, t) with fewer than min_events observed events.
struct ValidationReport {
  struct Cell {
    int j;
    int t;
    std::int64_t count;
  };

  std::vector<Cell> deficient;
  bool ok = true;
  std::int64_t min_events = 1;

  std::string describe() const;  // message with regrouping guidance
  std::vector<std::pair<int, int>> cells() const;
};

ValidationReport validate_counts(const SurvivalDataset& ds, std::int64_t min_events = 1);

}  // namespace dtsurv
