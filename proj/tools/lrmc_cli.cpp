// Command-line driver: generate instances, run solvers, compare them, and
// run the invariant checks.

#include "lrmc/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Options {
  lrmc::GenSpec gen;
  std::string algo = "cg";
  std::string metric = "scaled";
  std::string init = "random";
  double omega = 1.5;
  int max_iters = 500;
  double tol = 1e-20;
  double grad_tol = 1e-12;
  std::string out;
  std::string problem_dir;
  std::vector<std::string> cells;
  int jobs = 1;
  int instances = 100;
  unsigned long long init_seed = 0;
  bool init_seed_set = false;
};

void add_gen_flags(CLI::App &cmd, Options &o) {
  cmd.add_option("--n", o.gen.n, "Rows")->check(CLI::PositiveNumber);
  cmd.add_option("--m", o.gen.m, "Columns")->check(CLI::PositiveNumber);
  cmd.add_option("--rank", o.gen.rank, "Target rank")->check(CLI::PositiveNumber);
  cmd.add_option("--os", o.gen.os_ratio, "Over-sampling ratio")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.gen.seed, "Instance seed");
  cmd.add_option("--test-fraction", o.gen.test_fraction,
                 "Held-out entries as a fraction of n*m");
}

void add_solver_flags(CLI::App &cmd, Options &o) {
  cmd.add_option("--omega", o.omega, "LMaFit relaxation weight (>= 1)");
  cmd.add_option("--max-iters", o.max_iters, "Iteration cap");
  cmd.add_option("--tol", o.tol, "Cost threshold");
  cmd.add_option("--grad-tol", o.grad_tol, "Gradient-norm threshold");
  cmd.add_option("--init-seed", o.init_seed, "Seed for random initialization")
      ->each([&o](const std::string &) { o.init_seed_set = true; });
}

lrmc::SolverConfig solver_config(const Options &o) {
  lrmc::SolverConfig cfg;
  cfg.algo = lrmc::algorithm_from_string(o.algo);
  cfg.metric = lrmc::metric_from_string(o.metric);
  cfg.omega_relax = o.omega;
  cfg.max_iters = o.max_iters;
  cfg.cost_tol = o.tol;
  cfg.grad_tol = o.grad_tol;
  cfg.seed = o.gen.seed;
  cfg.validate();
  return cfg;
}

void write_meta(const fs::path &path, const lrmc::GenSpec &g) {
  json meta = {{"n", g.n},       {"m", g.m},       {"rank", g.rank},
               {"os", g.os_ratio}, {"seed", g.seed}, {"test_fraction", g.test_fraction}};
  std::ofstream(path) << meta.dump(2) << '\n';
}

lrmc::Problem load_problem(const fs::path &dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw lrmc::ArgumentError("missing " + (dir / "meta.json").string());
  const json meta = json::parse(in);
  const auto rank = meta.at("rank").get<lrmc::Index>();
  lrmc::SampleSet train = lrmc::read_matrix_market((dir / "train.mtx").string());
  std::optional<lrmc::SampleSet> test;
  if (fs::exists(dir / "test.mtx")) test = lrmc::read_matrix_market((dir / "test.mtx").string());
  return lrmc::Problem(std::move(train), rank, std::move(test));
}

int cmd_gen(const Options &o) {
  if (o.out.empty()) throw lrmc::ArgumentError("gen: --out directory is required");
  const lrmc::GeneratedProblem gp = lrmc::generate_problem(o.gen);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  lrmc::write_matrix_market((dir / "train.mtx").string(), gp.problem.omega());
  if (gp.problem.omega_test())
    lrmc::write_matrix_market((dir / "test.mtx").string(), *gp.problem.omega_test());
  write_meta(dir / "meta.json", o.gen);
  std::cout << "wrote " << gp.problem.omega().size() << " samples to " << dir.string() << '\n';
  return 0;
}

int cmd_run(const Options &o) {
  const lrmc::SolverConfig cfg = solver_config(o);
  std::optional<lrmc::Problem> prob;
  unsigned long long init_seed = o.init_seed_set ? o.init_seed : o.gen.seed;
  if (!o.problem_dir.empty()) {
    prob = load_problem(o.problem_dir);
  } else {
    prob = lrmc::generate_problem(o.gen).problem;
  }
  const lrmc::FactorPair x0 =
      lrmc::init_from_string(o.init) == lrmc::InitKind::Random
          ? lrmc::init_random(prob->n(), prob->m(), prob->rank(), init_seed)
          : lrmc::init_spectral(*prob);
  const lrmc::SolveResult res = lrmc::solve(*prob, x0, cfg);
  if (o.out.empty()) {
    lrmc::write_trace_csv(std::cout, res.trace);
  } else {
    std::ofstream csv(o.out);
    if (!csv) throw lrmc::ArgumentError("cannot write '" + o.out + "'");
    lrmc::write_trace_csv(csv, res.trace);
  }
  const auto &last = res.trace.records.back();
  std::cerr << o.algo << '/' << o.metric << '/' << o.init << ": "
            << lrmc::to_string(res.trace.status) << " after " << last.iter
            << " iterations, cost " << last.cost;
  if (!res.trace.message.empty()) std::cerr << " (" << res.trace.message << ")";
  if (prob->omega_test()) std::cerr << ", test rmse " << lrmc::rmse_on(res.point, *prob->omega_test());
  std::cerr << '\n';
  return 0;
}

int cmd_compare(const Options &o) {
  lrmc::RunSpec spec;
  spec.gen = o.gen;
  spec.config = solver_config(o);
  spec.init_seed = o.init_seed_set ? o.init_seed : o.gen.seed;
  spec.out_dir = o.out;
  spec.jobs = o.jobs;
  std::vector<std::string> cells = o.cells;
  if (cells.empty()) cells = {"gd:scaled:random", "gd:ri:random", "cg:scaled:random", "lmafit"};
  for (const auto &c : cells) spec.cells.push_back(lrmc::parse_cell(c));
  const lrmc::ExperimentResult result = lrmc::run_experiment(spec);
  lrmc::write_summary_csv(std::cout, result);
  return 0;
}

int cmd_check(const Options &o) {
  const auto results = lrmc::run_invariant_checks(o.gen.seed, o.instances);
  bool all = true;
  for (const auto &r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": worst " << r.worst
              << " (tol " << r.tolerance << ")\n";
    all = all && r.passed;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Fixed-rank matrix completion on the quotient manifold"};
  app.require_subcommand(1);
  Options o;

  auto *gen = app.add_subcommand("gen", "Write a synthetic problem as Matrix Market + JSON");
  add_gen_flags(*gen, o);
  gen->add_option("--out", o.out, "Output directory")->required();

  auto *run = app.add_subcommand("run", "Run a single solver and write its trace");
  add_gen_flags(*run, o);
  add_solver_flags(*run, o);
  run->add_option("--algo", o.algo, "gd | cg | tr | gs | lmafit");
  run->add_option("--metric", o.metric, "scaled | right-invariant");
  run->add_option("--init", o.init, "random | spectral");
  run->add_option("--problem", o.problem_dir, "Directory written by 'gen'");
  run->add_option("--out", o.out, "Trace CSV path (stdout if omitted)");

  auto *compare = app.add_subcommand("compare", "Run a batch of solvers on one instance");
  add_gen_flags(*compare, o);
  add_solver_flags(*compare, o);
  compare->add_option("--cells", o.cells, "algo[:metric[:init]] entries")->delimiter(',');
  compare->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  compare->add_option("--out", o.out, "Output directory for CSV traces");

  auto *check = app.add_subcommand("check", "Run the geometry and calculus invariant suite");
  check->add_option("--seed", o.gen.seed, "Seed");
  check->add_option("--instances", o.instances, "Random instances")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*run) return cmd_run(o);
    if (*compare) return cmd_compare(o);
    if (*check) return cmd_check(o);
  } catch (const lrmc::ArgumentError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
