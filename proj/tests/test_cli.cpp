#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtsurv/dataset.hpp"
#include "dtsurv/fitted_model.hpp"
#include "dtsurv/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string cli_path() {
  const char* env = std::getenv("DTSURV_CLI");
  REQUIRE_MESSAGE(env != nullptr, "DTSURV_CLI must point at the dtsurv binary");
  return env;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_cli(const std::string& args) {
  const std::string out_file = oracle::temp_path("cli_stdout.txt");
  const std::string err_file = oracle::temp_path("cli_stderr.txt");
  const std::string cmd = cli_path() + " " + args + " > " + out_file + " 2> " + err_file;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return r;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

struct Workspace {
  std::string dir;
  explicit Workspace(const std::string& name) : dir(oracle::temp_path(name)) {
    fs::remove_all(dir);
    fs::create_directory(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& f) const { return dir + "/" + f; }
};

}  // namespace

TEST_CASE("simulate: row counts and determinism") {
  Workspace ws("cli_sim");
  const std::string base = "simulate --preset reference --d 6 --seed 5 ";

  RunResult one = run_cli(base + "--n 1 --output " + ws.path("one.csv"));
  CHECK(one.exit_code == 0);
  CHECK(count_lines(slurp(ws.path("one.csv"))) == 2);  // header + 1 row
  CHECK(fs::exists(ws.path("one.csv.spec.json")));

  RunResult a = run_cli(base + "--n 200 --output " + ws.path("a.csv"));
  RunResult b = run_cli(base + "--n 200 --output " + ws.path("b.csv"));
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(slurp(ws.path("a.csv")) == slurp(ws.path("b.csv")));  // byte-identical

  RunResult c = run_cli(base + "--n 200 --seed 6 --output " + ws.path("c.csv"));
  (void)c;
  CHECK(slurp(ws.path("a.csv")) != slurp(ws.path("c.csv")));

  RunResult bad = run_cli("simulate --spec " + ws.path("missing.json") + " --n 5 --output " +
                          ws.path("x.csv"));
  CHECK(bad.exit_code == 3);
  CHECK(bad.err.find("\"error\"") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.path("x.csv")));

  // replaying the emitted scenario document reproduces the dataset
  RunResult replay =
      run_cli("simulate --spec " + ws.path("a.csv.spec.json") + " --n 200 --output " +
              ws.path("replay.csv"));
  CHECK(replay.exit_code == 0);
  CHECK(slurp(ws.path("replay.csv")) == slurp(ws.path("a.csv")));
}

TEST_CASE("inspect matches the in-process event table") {
  Workspace ws("cli_inspect");
  REQUIRE(run_cli("simulate --preset reference --d 5 --seed 11 --n 400 --output " +
                  ws.path("data.csv"))
              .exit_code == 0);
  REQUIRE(run_cli("inspect --input " + ws.path("data.csv") + " --output " +
                  ws.path("events.csv"))
              .exit_code == 0);

  const dtsurv::SurvivalDataset ds = dtsurv::load_csv(ws.path("data.csv"));
  const dtsurv::EventTable table = dtsurv::event_table(ds);

  std::ifstream in(ws.path("events.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "time,at_risk,events_j1,events_j2,censored");
  std::int64_t total = 0;
  int t0 = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string label, field;
    std::getline(row, label, ',');
    std::vector<std::int64_t> nums;
    while (std::getline(row, field, ',')) nums.push_back(std::stoll(field));
    REQUIRE(nums.size() == 4);
    if (label != "beyond") {
      CHECK(nums[0] == table.at_risk[t0]);
      CHECK(nums[1] == table.event_count(t0, 0));
      CHECK(nums[2] == table.event_count(t0, 1));
      CHECK(nums[3] == table.censored[t0]);
      ++t0;
    }
    total += nums[1] + nums[2] + nums[3];
  }
  CHECK(t0 == ds.d());
  CHECK(total == ds.n());  // every subject exits exactly once
}

TEST_CASE("fit: outputs, coefficient table shape, method agreement") {
  Workspace ws("cli_fit");
  REQUIRE(run_cli("simulate --preset reference --d 8 --seed 3 --n 4000 --output " +
                  ws.path("data.csv"))
              .exit_code == 0);

  RunResult two = run_cli("fit --input " + ws.path("data.csv") +
                          " --method two-stage --output " + ws.path("ts"));
  CHECK(two.exit_code == 0);
  RunResult exp = run_cli("fit --input " + ws.path("data.csv") +
                          " --method expansion --output " + ws.path("ex"));
  CHECK(exp.exit_code == 0);

  for (const char* suffix : {".coefs.csv", ".coefs.json", ".model.json", ".report.json"}) {
    CHECK(fs::exists(ws.path("ts") + suffix));
    CHECK(fs::exists(ws.path("ex") + suffix));
  }
  // M (d + p) parameter rows plus a header
  CHECK(count_lines(slurp(ws.path("ts.coefs.csv"))) == 1 + 2 * (8 + 5));

  const dtsurv::FittedModel ts = dtsurv::load_model_json(ws.path("ts.model.json"));
  const dtsurv::FittedModel ex = dtsurv::load_model_json(ws.path("ex.model.json"));
  CHECK(ts.method == "two-stage");
  CHECK(ex.method == "expansion");
  CHECK_FALSE(ts.has_alpha_se());
  CHECK(ex.has_alpha_se());
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 5; ++k)
      CHECK(std::fabs(ts.params.beta_at(j, k) - ex.params.beta_at(j, k)) <= 0.1);

  const nlohmann::json report = nlohmann::json::parse(slurp(ws.path("ts.report.json")));
  CHECK(report.at("method") == "two-stage");
  CHECK(report.at("wall_clock_seconds").get<double>() > 0.0);
  CHECK(report.at("n").get<int>() == 4000);

  SUBCASE("lasso shrinks coefficients toward and onto zero") {
    RunResult mild = run_cli("fit --input " + ws.path("data.csv") +
                             " --method expansion --penalizer 0.003 --l1-ratio 1 --output " +
                             ws.path("mild"));
    CHECK(mild.exit_code == 0);
    const dtsurv::FittedModel shrunk = dtsurv::load_model_json(ws.path("mild.model.json"));
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 5; ++k)
        CHECK(std::fabs(shrunk.params.beta_at(j, k)) <=
              std::fabs(ex.params.beta_at(j, k)) + 1e-12);

    RunResult lasso = run_cli("fit --input " + ws.path("data.csv") +
                              " --method expansion --penalizer 1000 --l1-ratio 1 --output " +
                              ws.path("l1"));
    CHECK(lasso.exit_code == 0);
    const dtsurv::FittedModel l1 = dtsurv::load_model_json(ws.path("l1.model.json"));
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 5; ++k) CHECK(l1.params.beta_at(j, k) == 0.0);
  }
  SUBCASE("config errors exit 2") {
    CHECK(run_cli("fit --input " + ws.path("data.csv") + " --method nonsense --output " +
                  ws.path("bad"))
              .exit_code == 2);
    CHECK(run_cli("fit --input " + ws.path("data.csv") +
                  " --method expansion --l1-ratio 2 --penalizer 1 --output " + ws.path("bad"))
              .exit_code == 2);
  }
  SUBCASE("missing input exits 3 with error JSON") {
    RunResult r = run_cli("fit --input " + ws.path("nope.csv") + " --output " + ws.path("bad"));
    CHECK(r.exit_code == 3);
    const nlohmann::json err = nlohmann::json::parse(r.err.substr(0, r.err.find('\n')));
    CHECK(err.at("error").at("category") == "data");
  }
}

TEST_CASE("fit aborts on sparse data and leaves no partial outputs") {
  Workspace ws("cli_sparse");
  // n = 120 over d = 30 leaves many empty (j, t) cells
  REQUIRE(run_cli("simulate --preset reference --d 30 --seed 2 --n 120 --output " +
                  ws.path("sparse.csv"))
              .exit_code == 0);
  RunResult r = run_cli("fit --input " + ws.path("sparse.csv") + " --method two-stage --output " +
                        ws.path("fit"));
  CHECK(r.exit_code == 3);
  const nlohmann::json err = nlohmann::json::parse(r.err.substr(0, r.err.find('\n')));
  CHECK(err.at("error").at("category") == "estimability");
  CHECK(err.at("error").contains("cells"));
  for (const char* suffix : {".coefs.csv", ".coefs.json", ".model.json", ".report.json"})
    CHECK_FALSE(fs::exists(ws.path("fit") + suffix));
}

TEST_CASE("predict: long-format output with per-subject identities") {
  Workspace ws("cli_predict");
  REQUIRE(run_cli("simulate --preset reference --d 6 --seed 19 --n 3000 --output " +
                  ws.path("data.csv"))
              .exit_code == 0);
  REQUIRE(run_cli("fit --input " + ws.path("data.csv") + " --method two-stage --output " +
                  ws.path("fit"))
              .exit_code == 0);

  {
    std::ofstream newdata(ws.path("new.csv"));
    newdata << "pid,Z1,Z2,Z3,Z4,Z5\nA,0.1,0.1,0.1,0.1,0.1\nB,0.5,0.5,0.5,0.5,0.5\n"
               "C,0.9,0.9,0.9,0.9,0.9\n";
  }
  RunResult r = run_cli("predict --model " + ws.path("fit.model.json") + " --input " +
                        ws.path("new.csv") + " --output " + ws.path("curves.csv"));
  CHECK(r.exit_code == 0);

  std::ifstream in(ws.path("curves.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "id,time,hazard_j1,event_prob_j1,cif_j1,hazard_j2,event_prob_j2,cif_j2,survival");
  int rows = 0;
  double last_cif1 = 0.0, last_surv = 1.0;
  std::map<std::string, std::pair<double, double>> final_state;  // id -> (cif sum, survival)
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream row(line);
    std::string id, time;
    double v[7];
    std::getline(row, id, ',');
    std::getline(row, time, ',');
    std::string field;
    for (int c = 0; c < 7; ++c) {
      std::getline(row, field, ',');
      v[c] = std::stod(field);
    }
    final_state[id] = {v[2] + v[5], v[6]};
    (void)last_cif1;
    (void)last_surv;
  }
  CHECK(rows == 3 * 6);
  for (const auto& [id, state] : final_state)
    CHECK(state.first + state.second == doctest::Approx(1.0).epsilon(1e-10));

  // matches the in-process prediction
  const dtsurv::FittedModel fitted = dtsurv::load_model_json(ws.path("fit.model.json"));
  const dtsurv::CurveTable table =
      dtsurv::predict_curves(fitted, {std::vector<double>(5, 0.5)});
  CHECK(final_state.count("B") == 1);
  double expected = table.rows.back().survival;
  CHECK(final_state["B"].second == doctest::Approx(expected).epsilon(1e-12));

  SUBCASE("schema mismatch exits 3") {
    std::ofstream badfile(ws.path("bad.csv"));
    badfile << "pid,Z1\nA,0.5\n";
    badfile.close();
    RunResult bad = run_cli("predict --model " + ws.path("fit.model.json") + " --input " +
                            ws.path("bad.csv") + " --output " + ws.path("nope.csv"));
    CHECK(bad.exit_code == 3);
  }
}

TEST_CASE("predict over a 30-point grid emits 3 x 30 rows") {
  Workspace ws("cli_predict30");
  // a specified model serialized directly; prediction needs no fit
  dtsurv::FittedModel model;
  const dtsurv::CoefficientSpec spec = dtsurv::CoefficientSpec::reference(30);
  model.method = "two-stage";
  model.grid = dtsurv::TimeGrid::numeric(30);
  model.params = spec.to_params();
  for (int k = 1; k <= 5; ++k) model.covariate_names.push_back("Z" + std::to_string(k));
  model.beta_se = dtsurv::Matrix(2, 5, 0.1);
  dtsurv::save_model_json(model, ws.path("model.json"));

  {
    std::ofstream newdata(ws.path("new.csv"));
    newdata << "pid,Z1,Z2,Z3,Z4,Z5\nA,0.2,0.2,0.2,0.2,0.2\nB,0.5,0.5,0.5,0.5,0.5\n"
               "C,0.8,0.8,0.8,0.8,0.8\n";
  }
  RunResult r = run_cli("predict --model " + ws.path("model.json") + " --input " +
                        ws.path("new.csv") + " --output " + ws.path("curves.csv"));
  CHECK(r.exit_code == 0);
  CHECK(count_lines(slurp(ws.path("curves.csv"))) == 1 + 3 * 30);

  // the model document round-trips exactly
  const dtsurv::FittedModel back = dtsurv::load_model_json(ws.path("model.json"));
  CHECK(back.method == model.method);
  CHECK(back.grid.labels == model.grid.labels);
  for (std::size_t i = 0; i < model.params.alpha.size(); ++i)
    CHECK(back.params.alpha[i] == model.params.alpha[i]);
  for (std::size_t i = 0; i < model.params.beta.size(); ++i)
    CHECK(back.params.beta[i] == model.params.beta[i]);
  CHECK_FALSE(back.has_alpha_se());
}

TEST_CASE("DTSURV_KERNELS forces the scalar kernels") {
  Workspace ws("cli_kern");
  REQUIRE(run_cli("simulate --preset reference --d 4 --seed 8 --n 800 --output " +
                  ws.path("data.csv"))
              .exit_code == 0);
  const std::string fit = "fit --input " + ws.path("data.csv") + " --method two-stage --output " +
                          ws.path("f");
  // run through env(1) so the variable reaches the child only
  const std::string cmd = "env DTSURV_KERNELS=scalar " + cli_path() + " " + fit +
                          " > /dev/null 2> /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(ws.path("f.report.json")));
  CHECK(report.at("kernels") == "scalar");
}

TEST_CASE("benchmark produces the full timing grid and a summary") {
  Workspace ws("cli_bench");
  RunResult r = run_cli("benchmark --n 1500 --d-grid 3,4 --reps 2 --seed 1 --output " +
                        ws.path("times.csv"));
  CHECK(r.exit_code == 0);

  std::ifstream in(ws.path("times.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,d,repetition,seconds,status");
  int rows = 0, ok_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    ok_rows += line.find(",ok") != std::string::npos;
  }
  CHECK(rows == 2 * 2 * 2);  // methods x d values x repetitions
  CHECK(ok_rows == rows);

  const std::string summary = slurp(ws.path("times.csv.summary.csv"));
  CHECK(summary.find("d,median_expansion_seconds,median_two_stage_seconds,ratio") !=
        std::string::npos);
  CHECK(count_lines(summary) == 3);  // header + one row per d
}
