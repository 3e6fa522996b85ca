#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtsurv {

// Error taxonomy shared by the library and the CLI. The CLI maps categories to
// exit codes: config -> 2; data, estimability, admissibility, boundary, root -> 3;
// convergence, separation -> 4.
enum class ErrorCategory {
  config,
  data,
  estimability,
  admissibility,
  boundary,
  root,
  convergence,
  separation,
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Invalid argument, bad configuration, malformed flags.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& m) : Error(ErrorCategory::config, m) {}
};

// Unreadable or malformed input data (CSV/JSON load failures).
class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorCategory::data, m) {}
};

// Too few events in one or more (event type, time) cells to estimate the model.
// Carries the offending cells so callers can emit machine-readable guidance.
class EstimabilityError : public Error {
 public:
  EstimabilityError(const std::string& m, std::vector<std::pair<int, int>> cells)
      : Error(ErrorCategory::estimability, m), cells_(std::move(cells)) {}

  const std::vector<std::pair<int, int>>& cells() const noexcept { return cells_; }

 private:
  std::vector<std::pair<int, int>> cells_;  // (event type j, time t), 1-based
};

// Hazards summing to >= 1 at some time point; the model assigns no valid
// probability to "no event" there.
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& m, int t) : Error(ErrorCategory::admissibility, m), t_(t) {}

  int time_index() const noexcept { return t_; }

 private:
  int t_;  // offending time, 1-based
};

// Observed event fraction at a boundary (0 or 1); the intercept has no finite
// solution and the data need regrouping.
class BoundaryError : public Error {
 public:
  BoundaryError(const std::string& m, int j, int t) : Error(ErrorCategory::boundary, m), j_(j), t_(t) {}

  int event_type() const noexcept { return j_; }
  int time_index() const noexcept { return t_; }

 private:
  int j_;
  int t_;
};

// A root could not be bracketed within the search range.
class RootError : public Error {
 public:
  explicit RootError(const std::string& m) : Error(ErrorCategory::root, m) {}
};

// Optimizer failed to reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& m) : Error(ErrorCategory::convergence, m) {}
};

// Unbounded likelihood: a coefficient diverged during unpenalized fitting.
class SeparationError : public Error {
 public:
  explicit SeparationError(const std::string& m) : Error(ErrorCategory::separation, m) {}
};

}  // namespace dtsurv
