// dtsurv: command-line front end for discrete-time competing-risks survival
// analysis. Subcommands: simulate, inspect, fit, predict, benchmark. All I/O
// is file-based; errors go to stderr as JSON (plus a readable message) with
// exit codes 2 (configuration), 3 (data/estimability), 4 (convergence).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtsurv/dataset.hpp"
#include "dtsurv/errors.hpp"
#include "dtsurv/expansion_fitter.hpp"
#include "dtsurv/io.hpp"
#include "dtsurv/kernels.hpp"
#include "dtsurv/simulation.hpp"
#include "dtsurv/two_stage_fitter.hpp"

namespace {

using nlohmann::json;

int exit_code_for(dtsurv::ErrorCategory category) {
  switch (category) {
    case dtsurv::ErrorCategory::config:
      return 2;
    case dtsurv::ErrorCategory::convergence:
    case dtsurv::ErrorCategory::separation:
      return 4;
    default:
      return 3;
  }
}

const char* category_name(dtsurv::ErrorCategory category) {
  switch (category) {
    case dtsurv::ErrorCategory::config:
      return "config";
    case dtsurv::ErrorCategory::data:
      return "data";
    case dtsurv::ErrorCategory::estimability:
      return "estimability";
    case dtsurv::ErrorCategory::admissibility:
      return "admissibility";
    case dtsurv::ErrorCategory::boundary:
      return "boundary";
    case dtsurv::ErrorCategory::root:
      return "root";
    case dtsurv::ErrorCategory::convergence:
      return "convergence";
    case dtsurv::ErrorCategory::separation:
      return "separation";
  }
  return "error";
}

void emit_error(const dtsurv::Error& e) {
  json payload;
  payload["error"]["category"] = category_name(e.category());
  payload["error"]["message"] = e.what();
  if (const auto* est = dynamic_cast<const dtsurv::EstimabilityError*>(&e)) {
    json cells = json::array();
    for (const auto& [j, t] : est->cells()) cells.push_back({j, t});
    payload["error"]["cells"] = std::move(cells);
  }
  if (const auto* adm = dynamic_cast<const dtsurv::AdmissibilityError*>(&e))
    payload["error"]["time"] = adm->time_index();
  std::cerr << payload.dump() << '\n';
  std::cerr << "error: " << e.what() << '\n';
}

// outputs are tracked so a failing command never leaves partial files behind
struct OutputGuard {
  std::vector<std::string> paths;

  void track(const std::string& path) { paths.push_back(path); }

  void remove_all() {
    std::error_code ec;
    for (const std::string& path : paths) std::filesystem::remove(path, ec);
  }
};

dtsurv::CsvSchema parse_schema(const std::string& text) {
  dtsurv::CsvSchema schema;
  if (text.empty()) return schema;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    const std::string item =
        text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw dtsurv::ArgumentError("bad --schema item '" + item + "', expected key=column");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "id")
      schema.id = value;
    else if (key == "time")
      schema.time = value;
    else if (key == "event")
      schema.event = value;
    else
      throw dtsurv::ArgumentError("unknown --schema key '" + key + "'");
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return schema;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    const std::string item =
        text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw dtsurv::ArgumentError("'" + item + "' is not a number");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::map<int, int> parse_merge(const std::string& text) {
  std::map<int, int> mapping;
  if (text.empty()) return mapping;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    const std::string item =
        text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw dtsurv::ArgumentError("bad --merge item '" + item + "', expected from:to");
    try {
      mapping[std::stoi(item.substr(0, colon))] = std::stoi(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw dtsurv::ArgumentError("bad --merge item '" + item + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return mapping;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string preset = "reference";
  std::string spec_path;
  long n = 0;
  int d = 30;
  double censoring_prob = 0.8;
  std::string covariate_rule = "uniform01";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
  std::string spec_output;
};

int run_simulate(const SimulateArgs& args, OutputGuard& guard) {
  dtsurv::SimulationConfig config;
  if (!args.spec_path.empty()) {
    config = dtsurv::load_simulation_config(args.spec_path);
  } else if (args.preset == "reference") {
    config.coefficients = dtsurv::CoefficientSpec::reference(args.d);
    config.censoring.kind = dtsurv::CensoringSpec::Kind::uniform_discrete;
    config.censoring.censoring_prob = args.censoring_prob;
    config.covariate_rule = args.covariate_rule;
  } else {
    throw dtsurv::ArgumentError("unknown preset '" + args.preset + "' (available: reference)");
  }
  if (args.seed_given) config.seed = args.seed;

  const dtsurv::CovariateRule rule = dtsurv::CovariateRule::by_name(config.covariate_rule);
  const dtsurv::SurvivalDataset ds =
      dtsurv::generate(args.n, config.coefficients, config.censoring, rule, config.seed);

  guard.track(args.output);
  dtsurv::write_csv(ds, args.output);
  const std::string spec_out =
      args.spec_output.empty() ? args.output + ".spec.json" : args.spec_output;
  guard.track(spec_out);
  dtsurv::save_simulation_config(config, spec_out);
  std::cout << "wrote " << ds.n() << " subjects to " << args.output << " (spec: " << spec_out
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

int run_inspect(const std::string& input, const std::string& schema_text,
                const std::string& output, OutputGuard& guard) {
  const dtsurv::SurvivalDataset ds = dtsurv::load_csv(input, parse_schema(schema_text));
  const dtsurv::EventTable table = dtsurv::event_table(ds);
  guard.track(output);
  dtsurv::write_event_table_csv(table, output);
  std::cout << "wrote event table (" << ds.d() << " time points, " << ds.M << " event types) to "
            << output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string schema_text;
  std::string method = "two-stage";
  std::string penalizer_text;
  double l1_ratio = 0.0;
  int clip_upper = 0;
  std::string merge_text;
  std::int64_t min_events = 1;
  bool parallel = false;
  std::string ties = "efron";
  std::string output;
};

int run_fit(const FitArgs& args, OutputGuard& guard) {
  if (args.method != "expansion" && args.method != "two-stage")
    throw dtsurv::ArgumentError("--method must be 'expansion' or 'two-stage'");

  dtsurv::SurvivalDataset ds = dtsurv::load_csv(args.input, parse_schema(args.schema_text));
  if (args.clip_upper > 0) ds = dtsurv::clip_tail(ds, args.clip_upper);
  const std::map<int, int> merge_map = parse_merge(args.merge_text);
  if (!merge_map.empty()) ds = dtsurv::merge_times(ds, merge_map);

  std::optional<dtsurv::PenaltySpec> penalty;
  if (!args.penalizer_text.empty()) {
    dtsurv::PenaltySpec spec;
    spec.penalizer = parse_double_list(args.penalizer_text);
    spec.l1_ratio = args.l1_ratio;
    spec.validate(ds.p());
    penalty = std::move(spec);
  }

  const auto started = std::chrono::steady_clock::now();
  dtsurv::FittedModel fitted;
  if (args.method == "expansion") {
    dtsurv::ExpansionFitOptions options;
    options.penalty = penalty;
    options.min_events = args.min_events;
    options.parallel = args.parallel;
    fitted = dtsurv::fit_expansion(ds, options);
  } else {
    dtsurv::TwoStageFitOptions options;
    options.penalty = penalty;
    options.min_events = args.min_events;
    options.parallel = args.parallel;
    if (args.ties == "breslow")
      options.ties = dtsurv::TieMethod::breslow;
    else if (args.ties != "efron")
      throw dtsurv::ArgumentError("--ties must be 'efron' or 'breslow'");
    fitted = dtsurv::fit_two_stage(ds, options);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const dtsurv::CoefficientTable table = dtsurv::summary(fitted);
  guard.track(args.output + ".coefs.csv");
  dtsurv::write_coefficient_csv(table, args.output + ".coefs.csv");
  guard.track(args.output + ".coefs.json");
  dtsurv::write_coefficient_json(table, args.output + ".coefs.json");
  guard.track(args.output + ".model.json");
  dtsurv::save_model_json(fitted, args.output + ".model.json");

  json report;
  report["method"] = fitted.method;
  report["n"] = ds.n();
  report["d"] = ds.d();
  report["p"] = ds.p();
  report["M"] = ds.M;
  report["loglik"] = fitted.loglik;
  report["iterations"] = fitted.iterations;
  json conv = json::array();
  for (char c : fitted.converged) conv.push_back(c != 0);
  report["converged"] = std::move(conv);
  report["wall_clock_seconds"] = seconds;
  report["kernels"] = dtsurv::kernels::active().name;
  guard.track(args.output + ".report.json");
  std::ofstream rep(args.output + ".report.json");
  if (!rep) throw dtsurv::DataError("cannot write '" + args.output + ".report.json'");
  rep << report.dump(2) << '\n';

  std::cout << "fit (" << fitted.method << ") finished in " << seconds << " s; outputs at "
            << args.output << ".{coefs.csv,coefs.json,model.json,report.json}\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int run_predict(const std::string& model_path, const std::string& input,
                const std::string& id_column, const std::string& output, OutputGuard& guard) {
  const dtsurv::FittedModel fitted = dtsurv::load_model_json(model_path);

  std::ifstream in(input);
  if (!in) throw dtsurv::DataError("cannot open '" + input + "'");
  std::string line;
  if (!std::getline(in, line)) throw dtsurv::DataError("'" + input + "' is empty");

  auto split = [](const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      std::size_t end = text.find(',', start);
      std::string item =
          text.substr(start, end == std::string::npos ? std::string::npos : end - start);
      // trim
      std::size_t b = item.find_first_not_of(" \t\r\n");
      std::size_t e = item.find_last_not_of(" \t\r\n");
      out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return out;
  };

  const std::vector<std::string> header = split(line);
  std::vector<std::size_t> cov_cols;
  for (const std::string& name : fitted.covariate_names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw dtsurv::DataError("'" + input + "': missing covariate column '" + name + "'");
    cov_cols.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::ptrdiff_t id_col = -1;
  if (auto it = std::find(header.begin(), header.end(), id_column); it != header.end())
    id_col = it - header.begin();

  std::vector<std::vector<double>> newdata;
  std::vector<std::string> ids;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != header.size())
      throw dtsurv::DataError("row " + std::to_string(row) + ": field count mismatch");
    std::vector<double> z;
    z.reserve(cov_cols.size());
    for (std::size_t c : cov_cols) {
      try {
        z.push_back(std::stod(fields[c]));
      } catch (const std::exception&) {
        throw dtsurv::DataError("row " + std::to_string(row) + ": '" + fields[c] +
                                "' is not numeric");
      }
    }
    newdata.push_back(std::move(z));
    ids.push_back(id_col >= 0 ? fields[id_col] : std::to_string(row - 2));
  }

  const dtsurv::CurveTable curves = dtsurv::predict_curves(fitted, newdata, &ids);
  guard.track(output);
  dtsurv::write_curve_table_csv(curves, output);
  std::cout << "wrote " << curves.rows.size() << " prediction rows to " << output << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  long n = 50000;
  std::string d_grid_text = "15,30";
  int reps = 5;
  std::uint64_t seed = 0;
  std::string output;
  std::string summary_output;
};

int run_benchmark(const BenchmarkArgs& args, OutputGuard& guard) {
  std::vector<int> d_grid;
  for (double v : parse_double_list(args.d_grid_text)) d_grid.push_back(static_cast<int>(v));
  if (d_grid.empty()) throw dtsurv::ArgumentError("--d-grid must not be empty");
  if (args.reps < 1) throw dtsurv::ArgumentError("--reps must be >= 1");

  guard.track(args.output);
  std::ofstream out(args.output);
  if (!out) throw dtsurv::DataError("cannot write '" + args.output + "'");
  out << "method,d,repetition,seconds,status\n";

  struct Cell {
    std::vector<double> expansion;
    std::vector<double> two_stage;
  };
  std::map<int, Cell> results;

  for (int d : d_grid) {
    for (int rep = 0; rep < args.reps; ++rep) {
      const std::uint64_t seed = args.seed + 1000003ull * rep + static_cast<std::uint64_t>(d);
      const dtsurv::CoefficientSpec spec = dtsurv::CoefficientSpec::reference(d);
      dtsurv::CensoringSpec censoring;
      censoring.censoring_prob = 0.8;
      const dtsurv::SurvivalDataset ds =
          dtsurv::generate(args.n, spec, censoring, dtsurv::CovariateRule::uniform01(), seed);

      auto time_fit = [&](const char* method) {
        const auto started = std::chrono::steady_clock::now();
        try {
          if (std::string(method) == "expansion")
            dtsurv::fit_expansion(ds);
          else
            dtsurv::fit_two_stage(ds);
        } catch (const dtsurv::Error& e) {
          out << method << ',' << d << ',' << rep << ",," << category_name(e.category()) << '\n';
          return std::numeric_limits<double>::quiet_NaN();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        out << method << ',' << d << ',' << rep << ',' << seconds << ",ok\n";
        return seconds;
      };

      const double t_exp = time_fit("expansion");
      const double t_two = time_fit("two-stage");
      if (t_exp == t_exp) results[d].expansion.push_back(t_exp);
      if (t_two == t_two) results[d].two_stage.push_back(t_two);
      out.flush();
    }
  }
  if (!out) throw dtsurv::DataError("failed while writing '" + args.output + "'");

  const std::string summary_path =
      args.summary_output.empty() ? args.output + ".summary.csv" : args.summary_output;
  guard.track(summary_path);
  std::ofstream summary(summary_path);
  if (!summary) throw dtsurv::DataError("cannot write '" + summary_path + "'");
  summary << "d,median_expansion_seconds,median_two_stage_seconds,ratio\n";
  for (const auto& [d, cell] : results) {
    const double med_exp = median(cell.expansion);
    const double med_two = median(cell.two_stage);
    summary << d << ',' << med_exp << ',' << med_two << ',' << med_exp / med_two << '\n';
    std::cout << "d = " << d << ": median expansion " << med_exp << " s, median two-stage "
              << med_two << " s, ratio " << med_exp / med_two << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time competing-risks survival analysis"};
  app.require_subcommand(1);

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("--preset", simulate_args.preset, "built-in scenario (reference)");
  simulate->add_option("--spec", simulate_args.spec_path, "scenario JSON file");
  simulate->add_option("--n", simulate_args.n, "number of subjects")->required();
  simulate->add_option("--d", simulate_args.d, "number of time points (preset only)");
  simulate->add_option("--censoring-prob", simulate_args.censoring_prob,
                       "probability of a finite uniform censoring draw (preset only)");
  simulate->add_option("--covariate-rule", simulate_args.covariate_rule,
                       "covariate sampler for presets (uniform01, standard_normal)");
  simulate->add_option("--seed", simulate_args.seed, "RNG seed")
      ->each([&](const std::string&) { simulate_args.seed_given = true; });
  simulate->add_option("--output", simulate_args.output, "dataset CSV path")->required();
  simulate->add_option("--spec-output", simulate_args.spec_output,
                       "scenario JSON output (default: <output>.spec.json)");

  std::string inspect_input, inspect_schema, inspect_output;
  CLI::App* inspect = app.add_subcommand("inspect", "event/censoring counts per time point");
  inspect->add_option("--input", inspect_input, "dataset CSV")->required();
  inspect->add_option("--schema", inspect_schema, "column mapping id=..,time=..,event=..");
  inspect->add_option("--output", inspect_output, "event table CSV path")->required();

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "estimate the hazard model");
  fit->add_option("--input", fit_args.input, "dataset CSV")->required();
  fit->add_option("--schema", fit_args.schema_text, "column mapping id=..,time=..,event=..");
  fit->add_option("--method", fit_args.method, "expansion or two-stage");
  fit->add_option("--penalizer", fit_args.penalizer_text,
                  "penalty weight (scalar or per-covariate comma list)");
  fit->add_option("--l1-ratio", fit_args.l1_ratio, "elastic-net mixing weight in [0,1]");
  fit->add_option("--clip-upper", fit_args.clip_upper, "clip observed times at this value");
  fit->add_option("--merge", fit_args.merge_text, "merge time points, e.g. 7:6,14:13,21:20");
  fit->add_option("--min-events", fit_args.min_events, "required events per (type, time) cell");
  fit->add_option("--ties", fit_args.ties, "tie convention for two-stage (efron, breslow)");
  fit->add_flag("--parallel", fit_args.parallel, "fit event types concurrently");
  fit->add_option("--output", fit_args.output, "output prefix")->required();

  std::string predict_model, predict_input, predict_id = "pid", predict_output;
  CLI::App* predict = app.add_subcommand("predict", "per-subject hazard/CIF/survival curves");
  predict->add_option("--model", predict_model, "fitted model JSON")->required();
  predict->add_option("--input", predict_input, "covariate CSV")->required();
  predict->add_option("--id-column", predict_id, "id column name (default pid)");
  predict->add_option("--output", predict_output, "curve CSV path")->required();

  BenchmarkArgs bench_args;
  CLI::App* benchmark = app.add_subcommand("benchmark", "time both fitters over a d grid");
  benchmark->add_option("--n", bench_args.n, "subjects per repetition");
  benchmark->add_option("--d-grid", bench_args.d_grid_text, "comma list of d values");
  benchmark->add_option("--reps", bench_args.reps, "repetitions per d");
  benchmark->add_option("--seed", bench_args.seed, "base RNG seed");
  benchmark->add_option("--output", bench_args.output, "timings CSV path")->required();
  benchmark->add_option("--summary-output", bench_args.summary_output,
                        "summary CSV path (default: <output>.summary.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  OutputGuard guard;
  try {
    if (simulate->parsed()) return run_simulate(simulate_args, guard);
    if (inspect->parsed()) return run_inspect(inspect_input, inspect_schema, inspect_output, guard);
    if (fit->parsed()) return run_fit(fit_args, guard);
    if (predict->parsed())
      return run_predict(predict_model, predict_input, predict_id, predict_output, guard);
    if (benchmark->parsed()) return run_benchmark(bench_args, guard);
  } catch (const dtsurv::Error& e) {
    guard.remove_all();
    emit_error(e);
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    guard.remove_all();
    json payload;
    payload["error"]["category"] = "config";
    payload["error"]["message"] = e.what();
    std::cerr << payload.dump() << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
