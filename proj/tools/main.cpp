// clqr: solve constrained LQR problems and run the benchmark protocols.

#include "clqr/afbs.hpp"
#include "clqr/errors.hpp"
#include "clqr/problem_io.hpp"
#include "clqr/protocols.hpp"
#include "clqr/systems.hpp"
#include "clqr/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kParse = 1, kValidation = 2, kSolver = 3 };

struct SolverFlags {
  double tol = 1e-4;
  std::size_t max_iter = 200000;
  double a = 4.0;
  std::string mode = "backtrack";
  double L0 = 1.0;
  double eta = 2.0;
  bool no_polish = false;
};

void add_solver_flags(CLI::App* app, SolverFlags& f) {
  app->add_option("--tol", f.tol, "Termination tolerance on the weighted dual residual");
  app->add_option("--max-iter", f.max_iter, "Iteration limit");
  app->add_option("--a", f.a, "Momentum parameter (> 2)");
  app->add_option("--mode", f.mode, "Stepsize rule")
      ->check(CLI::IsMember({"fixed", "backtrack"}));
  app->add_option("--L0", f.L0, "Initial curvature for backtracking");
  app->add_option("--eta", f.eta, "Backtracking growth factor (> 1)");
  app->add_flag("--no-polish", f.no_polish, "Skip the KKT polish");
}

// Problem-file options apply unless the same flag was given on the command line.
void merge_file_options(const std::map<std::string, std::string>& opts, CLI::App* app,
                        SolverFlags& f) {
  auto given = [app](const std::string& flag) { return app->count(flag) > 0; };
  for (const auto& [key, value] : opts) {
    if (key == "tol" && !given("--tol")) f.tol = std::stod(value);
    if (key == "max_iter" && !given("--max-iter")) f.max_iter = std::stoul(value);
    if (key == "a" && !given("--a")) f.a = std::stod(value);
    if (key == "mode" && !given("--mode")) f.mode = value;
    if (key == "L0" && !given("--L0")) f.L0 = std::stod(value);
    if (key == "eta" && !given("--eta")) f.eta = std::stod(value);
  }
}

clqr::SolverOptions to_options(const SolverFlags& f) {
  clqr::SolverOptions o;
  o.tol = f.tol;
  o.max_iter = f.max_iter;
  o.a = f.a;
  o.stepsize_mode =
      f.mode == "fixed" ? clqr::StepsizeMode::Fixed : clqr::StepsizeMode::Backtracking;
  o.L0 = f.L0;
  o.eta = f.eta;
  o.polish = !f.no_polish;
  o.check();
  return o;
}

std::string describe(const SolverFlags& f) {
  std::ostringstream os;
  os.precision(12);
  os << "--tol " << f.tol << " --max-iter " << f.max_iter << " --a " << f.a << " --mode "
     << f.mode << " --L0 " << f.L0 << " --eta " << f.eta << (f.no_polish ? " --no-polish" : "");
  return os.str();
}

int report_error(const clqr::ClqrError& e) {
  std::cerr << "error: " << e.what() << '\n';
  switch (e.kind()) {
    case clqr::ErrorKind::ParseError:
      return kParse;
    case clqr::ErrorKind::ValidationFailed:
      return kValidation;
    default:
      return kSolver;
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_trajectory(std::ostream& out, const clqr::Trajectory& traj) {
  out.precision(12);
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.inputs.empty() ? 0 : traj.inputs.front().size();
  out << "i";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u" << j;
  out << '\n';
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << traj.states[i](j);
    for (Eigen::Index j = 0; j < m; ++j) {
      out << ',';
      if (i < traj.inputs.size()) out << traj.inputs[i](j);
    }
    out << '\n';
  }
}

int cmd_solve(const std::string& problem_path, CLI::App* app, SolverFlags flags,
              const std::string& out_dir) {
  const clqr::ProblemFile file = clqr::load_problem(problem_path);
  merge_file_options(file.options, app, flags);
  const clqr::SolverOptions options = to_options(flags);
  const clqr::ClqrSolver solver(file.problem);
  const clqr::SolveResult res = solver.solve(options);

  fs::create_directories(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "trajectory.csv");
    write_trajectory(out, res.trajectory);
  }
  {
    auto out = open_out(fs::path(out_dir) / "iterations.csv");
    res.log.write_csv(out);
  }

  const bool converged = res.log.status == clqr::SolveStatus::Converged;
  std::cout.precision(12);
  std::cout << "status=" << (converged ? "converged" : "max_iter_exceeded") << '\n'
            << "iters=" << res.iterations << '\n'
            << "T_inf=" << res.T_inf << '\n'
            << "objective=" << res.objective << '\n'
            << "dual_objective=" << res.dual_objective << '\n'
            << "polished=" << (res.polished ? 1 : 0) << '\n'
            << "max_violation=" << res.max_violation << '\n';
  if (res.stepsize_fallback) std::cout << "stepsize_fallback=1\n";
  if (!converged) {
    std::cerr << "error: MaxIterExceeded: no convergence within " << options.max_iter
              << " iterations\n";
    return kSolver;
  }
  return kOk;
}

struct BenchFlags {
  std::string problem;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  double pct = 0.01;
  std::size_t steps = 15;
  std::size_t t_cap = 40;
};

int cmd_benchmark(const std::string& protocol, CLI::App* app, SolverFlags flags,
                  const BenchFlags& bench) {
  clqr::LtiProblem problem = clqr::toy_system();
  clqr::SamplingSpec spec = clqr::SamplingSpec::toy();
  if (!bench.problem.empty()) {
    const clqr::ProblemFile file = clqr::load_problem(bench.problem);
    merge_file_options(file.options, app, flags);
    problem = file.problem;
    spec = clqr::SamplingSpec::for_problem(problem);
  }
  spec.T_cap = bench.t_cap;
  const clqr::SolverOptions options = to_options(flags);
  const clqr::ClqrSolver solver(problem);

  std::size_t samples = bench.samples;
  if (samples == 0) {
    samples = protocol == "histogram" ? 750 : protocol == "mpc-compare" ? 243 : 68;
  }

  std::ostringstream pre;
  pre.precision(12);
  pre << "clqr " << clqr::version() << " benchmark " << protocol
      << " --problem " << (bench.problem.empty() ? "<toy>" : fs::path(bench.problem).filename().string())
      << " --samples " << samples << " --seed " << bench.seed << " --t-cap " << bench.t_cap;
  if (protocol == "warm-start") pre << " --pct " << bench.pct << " --steps " << bench.steps;
  pre << ' ' << describe(flags);
  const std::string preamble = pre.str();

  const std::vector<clqr::Vector> starts =
      protocol == "warm-start"
          ? clqr::sample_closed_loop_starts(solver, options, spec, samples, bench.pct,
                                            bench.steps, bench.seed)
          : clqr::sample_initial_states(solver, spec, samples, bench.seed);
  if (starts.size() < samples) {
    std::cerr << "warning: only " << starts.size() << " of " << samples
              << " draws passed the feasibility filter\n";
  }

  const fs::path dir(bench.out_dir);
  fs::create_directories(dir);
  std::cout.precision(12);
  if (protocol == "histogram") {
    const auto report = clqr::run_histogram(solver, options, starts);
    auto s = open_out(dir / "histogram_samples.csv");
    clqr::write_histogram_samples(s, report, preamble);
    auto a = open_out(dir / "histogram_aggregate.csv");
    clqr::write_histogram_aggregate(a, report, preamble);
    std::cout << "samples=" << report.samples.size() << '\n'
              << "T_inf_mean=" << report.T_inf.mean << '\n'
              << "T_inf_max=" << report.T_inf.max << '\n';
  } else if (protocol == "mpc-compare") {
    const auto report = clqr::run_mpc_compare(solver, options, starts, 2 * bench.t_cap);
    auto s = open_out(dir / "mpc_compare_samples.csv");
    clqr::write_mpc_compare_samples(s, report, preamble);
    auto a = open_out(dir / "mpc_compare_aggregate.csv");
    clqr::write_mpc_compare_aggregate(a, report, preamble);
    auto g = open_out(dir / "mpc_compare_by_tmin.csv");
    clqr::write_mpc_compare_by_tmin(g, report, preamble);
    std::cout << "samples=" << report.samples.size() << '\n'
              << "median_ratio_Tinf_Tstar=" << report.median_ratio_Tinf_Tstar << '\n'
              << "median_ratio_Tmin_Tstar=" << report.median_ratio_Tmin_Tstar << '\n';
  } else {
    const auto report =
        clqr::run_warm_start(solver, options, starts, bench.pct, bench.steps, bench.seed,
                             spec.T_cap);
    auto s = open_out(dir / "warm_start_samples.csv");
    clqr::write_warm_start_samples(s, report, preamble);
    auto a = open_out(dir / "warm_start_aggregate.csv");
    clqr::write_warm_start_aggregate(a, report, preamble);
    std::cout << "runs=" << report.cold.size() << '\n'
              << "cold_median_avg_iters=" << report.cold_run_average.median << '\n'
              << "warm_median_avg_iters=" << report.warm_run_average.median << '\n'
              << "cold_median_iters=" << report.cold_iterations.median << '\n'
              << "warm_median_iters=" << report.warm_iterations.median << '\n';
  }
  auto plot = open_out(dir / "plot.py");
  plot << clqr::plot_script(protocol);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite-horizon constrained LQR solver"};
  app.set_version_flag("--version", clqr::version());
  app.require_subcommand(1);

  SolverFlags solve_flags;
  std::string problem_path;
  std::string solve_out = ".";
  CLI::App* solve = app.add_subcommand("solve", "Solve one problem file");
  solve->add_option("--problem", problem_path, "Problem JSON file")->required();
  solve->add_option("--out-dir", solve_out, "Directory for trajectory.csv and iterations.csv");
  add_solver_flags(solve, solve_flags);

  SolverFlags bench_flags;
  BenchFlags bench;
  std::string protocol;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Run a seeded benchmark protocol");
  benchmark->add_option("protocol", protocol, "histogram | mpc-compare | warm-start")
      ->required()
      ->check(CLI::IsMember({"histogram", "mpc-compare", "warm-start"}));
  benchmark->add_option("--problem", bench.problem, "Problem JSON file (default: toy system)");
  benchmark->add_option("--samples", bench.samples, "Number of initial states");
  benchmark->add_option("--seed", bench.seed, "Sampling and perturbation seed");
  benchmark->add_option("--out-dir", bench.out_dir, "Output directory");
  benchmark->add_option("--pct", bench.pct, "Relative state perturbation (warm-start)");
  benchmark->add_option("--steps", bench.steps, "Closed-loop steps per run (warm-start)");
  benchmark->add_option("--t-cap", bench.t_cap, "Horizon of the sampling feasibility check");
  add_solver_flags(benchmark, bench_flags);

  std::string example_out = "problem.json";
  std::string example_system = "toy";
  std::uint64_t example_seed = 7;
  CLI::App* example = app.add_subcommand("example", "Write a built-in problem file");
  example->add_option("--system", example_system, "toy | quadrotor")
      ->check(CLI::IsMember({"toy", "quadrotor"}));
  example->add_option("--seed", example_seed, "Parameter seed (quadrotor)");
  example->add_option("--out", example_out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    if (*solve) return cmd_solve(problem_path, solve, solve_flags, solve_out);
    if (*benchmark) return cmd_benchmark(protocol, benchmark, bench_flags, bench);
    if (*example) {
      clqr::save_problem(example_out, example_system == "toy"
                                          ? clqr::toy_system()
                                          : clqr::quadrotor_standin(example_seed));
      return kOk;
    }
  } catch (const clqr::ClqrError& e) {
    return report_error(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kOk;
}
