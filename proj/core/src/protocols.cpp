#include "clqr/protocols.hpp"

#include "clqr/errors.hpp"
#include "clqr/lp.hpp"
#include "clqr/mpc.hpp"
#include "clqr/oracle_qp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace clqr {

SamplingSpec SamplingSpec::toy() {
  SamplingSpec s;
  s.mean = (Vector(2) << -3.0, 0.3).finished();
  s.stddev = (Vector(2) << 2.0, std::sqrt(0.4)).finished();
  return s;
}

SamplingSpec SamplingSpec::for_problem(const LtiProblem& p) {
  SamplingSpec s;
  s.mean = Vector::Zero(p.n());
  s.stddev = Vector::Ones(p.n());
  for (Eigen::Index j = 0; j < p.n(); ++j) {
    const Vector e = Vector::Unit(p.n(), j);
    const LpResult hi = maximize_over_polytope(e, p.Cx, p.cx);
    const LpResult lo = maximize_over_polytope(-e, p.Cx, p.cx);
    if (hi.status == LpStatus::Optimal && lo.status == LpStatus::Optimal) {
      s.stddev(j) = 0.3 * std::max(hi.value, lo.value);
    }
  }
  return s;
}

namespace {

bool in_state_box(const LtiProblem& p, const Vector& x) {
  return p.px() == 0 || (p.Cx * x - p.cx).maxCoeff() <= 0.0;
}

}  // namespace

std::vector<Vector> sample_initial_states(const ClqrSolver& solver, const SamplingSpec& spec,
                                          std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> out;
  const std::size_t budget = count * spec.oversample;
  for (std::size_t draw = 0; draw < budget && out.size() < count; ++draw) {
    Vector x(spec.mean.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = spec.mean(j) + spec.stddev(j) * normal(rng);
    if (in_state_box(solver.problem(), x) && is_feasible_start(solver, x, spec.T_cap)) {
      out.push_back(std::move(x));
    }
  }
  return out;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median_of(std::vector<double> v) { return summarize(std::move(v)).median; }

void write_preamble(std::ostream& out, const std::string& preamble) {
  if (!preamble.empty()) out << "# " << preamble << '\n';
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) out << ',' << v(j);
}

std::string vector_header(const char* prefix, Eigen::Index n) {
  std::string s;
  for (Eigen::Index j = 0; j < n; ++j) s += "," + std::string(prefix) + std::to_string(j);
  return s;
}

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& out) : out_(out), old_(out.precision(10)) {}
  ~PrecisionGuard() { out_.precision(old_); }
  std::ostream& out_;
  std::streamsize old_;
};

void write_summary(std::ostream& out, const std::string& name, const Summary& s) {
  out << name << "_count," << s.count << '\n';
  out << name << "_mean," << s.mean << '\n';
  out << name << "_median," << s.median << '\n';
  out << name << "_q1," << s.q1 << '\n';
  out << name << "_q3," << s.q3 << '\n';
  out << name << "_min," << s.min << '\n';
  out << name << "_max," << s.max << '\n';
}

}  // namespace

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

HistogramReport run_histogram(const ClqrSolver& solver, const SolverOptions& options,
                              const std::vector<Vector>& starts) {
  HistogramReport report;
  std::vector<double> T_values;
  std::vector<double> iter_values;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    HistogramSample s;
    s.id = i;
    s.x_init = starts[i];
    try {
      const SolveResult res = solver.solve_from(starts[i], options);
      s.converged = res.log.status == SolveStatus::Converged;
      s.T_inf = res.T_inf;
      s.iterations = res.iterations;
      s.objective = res.objective;
    } catch (const ClqrError&) {
      s.converged = false;
    }
    if (s.converged) {
      T_values.push_back(static_cast<double>(s.T_inf));
      iter_values.push_back(static_cast<double>(s.iterations));
    }
    report.samples.push_back(std::move(s));
  }
  report.T_inf = summarize(T_values);
  report.iterations = summarize(iter_values);
  return report;
}

const char* mpc_scenario_name(std::size_t index) {
  static const char* names[kMpcScenarioCount] = {"Tmin_term",  "Tmin_free",  "2Tmin_term",
                                                 "2Tmin_free", "Tstar_term", "Tstar_free"};
  return index < kMpcScenarioCount ? names[index] : "unknown";
}

MpcCompareReport run_mpc_compare(const ClqrSolver& solver, const SolverOptions& options,
                                 const std::vector<Vector>& starts, std::size_t T_cap) {
  const LtiProblem& base = solver.problem();
  const RiccatiData& ric = solver.riccati();
  const PolytopeSet mpi = compute_mpi_set(ric.A_cl, lq_constraint_polytope(base, ric));
  const ClqrSolver unweighted_solver(unweighted(base));

  SolverOptions mpc_options = options;
  mpc_options.polish = false;

  MpcCompareReport report;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    MpcCompareSample s;
    s.id = i;
    s.x_init = starts[i];
    LtiProblem p = unweighted(base);
    p.x_init = starts[i];
    try {
      s.T_min = find_Tmin(p, ric, mpi, T_cap);
      s.T_star = find_Tstar(p, ric, mpi, T_cap, options.active_tol, s.T_min);
      s.feasible = true;
    } catch (const ClqrError&) {
      s.feasible = false;
    }
    if (s.feasible) {
      const std::size_t horizons[3] = {s.T_min, 2 * s.T_min, s.T_star};
      for (std::size_t h = 0; h < 3; ++h) {
        for (std::size_t with_term = 0; with_term < 2; ++with_term) {
          const std::size_t idx = 2 * h + with_term;
          MpcScenario sc;
          sc.horizon = horizons[h];
          sc.problem = &p;
          if (with_term == 0) sc.terminal_set = mpi;
          try {
            solve_mpc(sc, ric, mpc_options);
            s.mpc_feasible[idx] = sc.feasible;
            s.mpc_iterations[idx] = sc.iterations;
          } catch (const ClqrError&) {
            s.mpc_feasible[idx] = false;
          }
        }
      }
    }
    try {
      const SolveResult r = solver.solve_from(starts[i], options);
      s.clqr_w_converged = r.log.status == SolveStatus::Converged;
      s.T_inf_w = r.T_inf;
      s.iters_clqr_w = r.iterations;
    } catch (const ClqrError&) {
      s.clqr_w_converged = false;
    }
    try {
      const SolveResult r = unweighted_solver.solve_from(starts[i], options);
      s.clqr_converged = r.log.status == SolveStatus::Converged;
      s.T_inf = r.T_inf;
      s.iters_clqr = r.iterations;
    } catch (const ClqrError&) {
      s.clqr_converged = false;
    }
    report.samples.push_back(std::move(s));
  }

  // Medians over samples where every compared quantity is available.
  std::vector<double> mpc[kMpcScenarioCount];
  std::vector<double> clqr_w;
  std::vector<double> clqr;
  std::vector<double> r_inf;
  std::vector<double> r_inf_w;
  std::vector<double> r_min;
  for (const auto& s : report.samples) {
    if (!s.feasible || !s.clqr_w_converged || !s.clqr_converged) continue;
    for (std::size_t k = 0; k < kMpcScenarioCount; ++k) {
      if (s.mpc_feasible[k]) mpc[k].push_back(static_cast<double>(s.mpc_iterations[k]));
    }
    clqr_w.push_back(static_cast<double>(s.iters_clqr_w));
    clqr.push_back(static_cast<double>(s.iters_clqr));
    const double ts = static_cast<double>(s.T_star);
    r_inf.push_back(static_cast<double>(s.T_inf) / ts);
    r_inf_w.push_back(static_cast<double>(s.T_inf_w) / ts);
    r_min.push_back(static_cast<double>(s.T_min) / ts);
  }
  for (std::size_t k = 0; k < kMpcScenarioCount; ++k) {
    report.median_iters_mpc[k] = median_of(mpc[k]);
  }
  report.median_iters_clqr_w = median_of(clqr_w);
  report.median_iters_clqr = median_of(clqr);
  report.median_ratio_Tinf_Tstar = median_of(r_inf);
  report.median_ratio_Tinf_w_Tstar = median_of(r_inf_w);
  report.median_ratio_Tmin_Tstar = median_of(r_min);
  report.min_ratio_Tmin_Tstar = summarize(r_min).min;
  return report;
}

WarmStartReport run_warm_start(const ClqrSolver& solver, const SolverOptions& options,
                               const std::vector<Vector>& starts, double perturbation,
                               std::size_t steps, std::uint64_t seed,
                               std::size_t feasibility_horizon) {
  WarmStartReport report;
  report.perturbation = perturbation;
  std::vector<double> cold_iters;
  std::vector<double> warm_iters;
  std::vector<double> cold_avg;
  std::vector<double> warm_avg;
  const auto collect = [](const ClosedLoopRun& run, std::vector<double>& per_solve,
                          std::vector<double>& per_run) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : run.records) {
      if (!r.feasible) continue;
      total += static_cast<double>(r.iterations);
      ++n;
      if (r.step > 0) per_solve.push_back(static_cast<double>(r.iterations));
    }
    if (n > 0) per_run.push_back(total / static_cast<double>(n));
  };
  for (std::size_t i = 0; i < starts.size(); ++i) {
    ClosedLoopRun proto;
    proto.steps = steps;
    proto.perturbation = perturbation;
    proto.feasibility_horizon = feasibility_horizon;
    const std::uint64_t run_seed = seed + i;
    ClosedLoopRun cold = proto;
    cold.warm = false;
    ClosedLoopRun warm = proto;
    warm.warm = true;
    cold = run_closed_loop_from(solver, starts[i], options, cold, run_seed);
    warm = run_closed_loop_from(solver, starts[i], options, warm, run_seed);
    collect(cold, cold_iters, cold_avg);
    collect(warm, warm_iters, warm_avg);
    report.cold.push_back(std::move(cold));
    report.warm.push_back(std::move(warm));
  }
  report.cold_run_average = summarize(cold_avg);
  report.warm_run_average = summarize(warm_avg);
  report.cold_iterations = summarize(cold_iters);
  report.warm_iterations = summarize(warm_iters);
  return report;
}

std::vector<Vector> sample_closed_loop_starts(const ClqrSolver& solver,
                                              const SolverOptions& options,
                                              const SamplingSpec& spec, std::size_t count,
                                              double perturbation, std::size_t steps,
                                              std::uint64_t seed) {
  const std::vector<Vector> candidates =
      sample_initial_states(solver, spec, count * spec.oversample, seed);
  std::vector<Vector> out;
  for (const Vector& x : candidates) {
    if (out.size() >= count) break;
    ClosedLoopRun run;
    run.steps = steps;
    run.perturbation = perturbation;
    run.feasibility_horizon = spec.T_cap;
    run = run_closed_loop_from(solver, x, options, run, seed + out.size());
    if (!run.failed_step) out.push_back(x);
  }
  return out;
}

void write_histogram_samples(std::ostream& out, const HistogramReport& report,
                             const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  const Eigen::Index n = report.samples.empty() ? 0 : report.samples.front().x_init.size();
  out << "sample_id" << vector_header("x0_", n) << ",converged,T_inf,iters,objective\n";
  for (const auto& s : report.samples) {
    out << s.id;
    write_vector(out, s.x_init);
    out << ',' << (s.converged ? 1 : 0) << ',' << s.T_inf << ',' << s.iterations << ','
        << s.objective << '\n';
  }
}

void write_histogram_aggregate(std::ostream& out, const HistogramReport& report,
                               const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  out << "metric,value\n";
  out << "samples," << report.samples.size() << '\n';
  write_summary(out, "T_inf", report.T_inf);
  write_summary(out, "iters", report.iterations);
  std::map<std::size_t, std::size_t> counts;
  for (const auto& s : report.samples) {
    if (s.converged) ++counts[s.T_inf];
  }
  for (const auto& [T, c] : counts) out << "T_inf_count_" << T << ',' << c << '\n';
}

void write_mpc_compare_samples(std::ostream& out, const MpcCompareReport& report,
                               const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  const Eigen::Index n = report.samples.empty() ? 0 : report.samples.front().x_init.size();
  out << "sample_id" << vector_header("x0_", n) << ",feasible,T_min,T_star,T_inf_w,T_inf";
  for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ",iters_" << mpc_scenario_name(k);
  out << ",iters_clqr_w,iters_clqr";
  for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ",feasible_" << mpc_scenario_name(k);
  out << ",converged_clqr_w,converged_clqr\n";
  for (const auto& s : report.samples) {
    out << s.id;
    write_vector(out, s.x_init);
    out << ',' << (s.feasible ? 1 : 0) << ',' << s.T_min << ',' << s.T_star << ',' << s.T_inf_w
        << ',' << s.T_inf;
    for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ',' << s.mpc_iterations[k];
    out << ',' << s.iters_clqr_w << ',' << s.iters_clqr;
    for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ',' << (s.mpc_feasible[k] ? 1 : 0);
    out << ',' << (s.clqr_w_converged ? 1 : 0) << ',' << (s.clqr_converged ? 1 : 0) << '\n';
  }
}

void write_mpc_compare_aggregate(std::ostream& out, const MpcCompareReport& report,
                                 const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  out << "metric,value\n";
  out << "samples," << report.samples.size() << '\n';
  for (std::size_t k = 0; k < kMpcScenarioCount; ++k) {
    out << "median_iters_" << mpc_scenario_name(k) << ',' << report.median_iters_mpc[k] << '\n';
  }
  out << "median_iters_clqr_w," << report.median_iters_clqr_w << '\n';
  out << "median_iters_clqr," << report.median_iters_clqr << '\n';
  out << "median_ratio_Tinf_Tstar," << report.median_ratio_Tinf_Tstar << '\n';
  out << "median_ratio_Tinf_w_Tstar," << report.median_ratio_Tinf_w_Tstar << '\n';
  out << "median_ratio_Tmin_Tstar," << report.median_ratio_Tmin_Tstar << '\n';
  out << "min_ratio_Tmin_Tstar," << report.min_ratio_Tmin_Tstar << '\n';
}

void write_mpc_compare_by_tmin(std::ostream& out, const MpcCompareReport& report,
                               const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  struct Group {
    std::size_t count = 0;
    double mpc[kMpcScenarioCount] = {};
    double clqr_w = 0.0;
    double clqr = 0.0;
    double T_star = 0.0;
    double T_inf_w = 0.0;
    double T_inf = 0.0;
  };
  std::map<std::size_t, Group> groups;
  for (const auto& s : report.samples) {
    if (!s.feasible || !s.clqr_w_converged || !s.clqr_converged) continue;
    Group& g = groups[s.T_min];
    ++g.count;
    for (std::size_t k = 0; k < kMpcScenarioCount; ++k) {
      g.mpc[k] += static_cast<double>(s.mpc_iterations[k]);
    }
    g.clqr_w += static_cast<double>(s.iters_clqr_w);
    g.clqr += static_cast<double>(s.iters_clqr);
    g.T_star += static_cast<double>(s.T_star);
    g.T_inf_w += static_cast<double>(s.T_inf_w);
    g.T_inf += static_cast<double>(s.T_inf);
  }
  out << "T_min,count";
  for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ",mean_iters_" << mpc_scenario_name(k);
  out << ",mean_iters_clqr_w,mean_iters_clqr,mean_T_star,mean_T_inf_w,mean_T_inf\n";
  for (const auto& [T, g] : groups) {
    const double c = static_cast<double>(g.count);
    out << T << ',' << g.count;
    for (std::size_t k = 0; k < kMpcScenarioCount; ++k) out << ',' << g.mpc[k] / c;
    out << ',' << g.clqr_w / c << ',' << g.clqr / c << ',' << g.T_star / c << ','
        << g.T_inf_w / c << ',' << g.T_inf / c << '\n';
  }
}

void write_warm_start_samples(std::ostream& out, const WarmStartReport& report,
                              const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  out << "sample_id,mode,step,iters,T_inf,feasible\n";
  auto rows = [&out](const std::vector<ClosedLoopRun>& runs, const char* mode) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      for (const auto& r : runs[i].records) {
        out << i << ',' << mode << ',' << r.step << ',' << r.iterations << ',' << r.T_inf << ','
            << (r.feasible ? 1 : 0) << '\n';
      }
    }
  };
  rows(report.cold, "cold");
  rows(report.warm, "warm");
}

void write_warm_start_aggregate(std::ostream& out, const WarmStartReport& report,
                                const std::string& preamble) {
  PrecisionGuard guard(out);
  write_preamble(out, preamble);
  out << "metric,value\n";
  out << "perturbation," << report.perturbation << '\n';
  out << "runs," << report.cold.size() << '\n';
  write_summary(out, "cold_run_avg_iters", report.cold_run_average);
  write_summary(out, "warm_run_avg_iters", report.warm_run_average);
  write_summary(out, "cold_iters", report.cold_iterations);
  write_summary(out, "warm_iters", report.warm_iterations);
}

std::string plot_script(const std::string& protocol) {
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
       "import os\n"
       "import pandas as pd\n"
       "import matplotlib\n"
       "matplotlib.use(\"Agg\")\n"
       "import matplotlib.pyplot as plt\n\n"
       "here = os.path.dirname(os.path.abspath(__file__))\n\n\n"
       "def load(name):\n"
       "    return pd.read_csv(os.path.join(here, name), comment=\"#\")\n\n\n";
  if (protocol == "histogram") {
    s << "df = load(\"histogram_samples.csv\")\n"
         "df = df[df.converged == 1]\n"
         "fig, ax = plt.subplots()\n"
         "bins = range(0, int(df.T_inf.max()) + 2)\n"
         "ax.hist(df.T_inf, bins=bins, align=\"left\", edgecolor=\"black\")\n"
         "ax.set_xlabel(\"T_inf\")\n"
         "ax.set_ylabel(\"count\")\n"
         "fig.savefig(os.path.join(here, \"histogram.png\"), dpi=150)\n";
  } else if (protocol == "mpc-compare") {
    s << "g = load(\"mpc_compare_by_tmin.csv\")\n"
         "fig, ax = plt.subplots()\n"
         "for col in [c for c in g.columns if c.startswith(\"mean_iters_\")]:\n"
         "    ax.plot(g.T_min, g[col], marker=\"o\", label=col[len(\"mean_iters_\"):])\n"
         "ax.set_xlabel(\"T_min\")\n"
         "ax.set_ylabel(\"mean iterations\")\n"
         "ax.legend()\n"
         "fig.savefig(os.path.join(here, \"mpc_compare_iterations.png\"), dpi=150)\n\n"
         "df = load(\"mpc_compare_samples.csv\")\n"
         "df = df[(df.feasible == 1) & (df.converged_clqr == 1) & (df.converged_clqr_w == 1)]\n"
         "fig, ax = plt.subplots()\n"
         "ax.plot(df.T_min / df.T_star, \".\", label=\"T_min / T_star\")\n"
         "ax.plot(df.T_inf_w / df.T_star, \".\", label=\"T_inf_w / T_star\")\n"
         "ax.plot(df.T_inf / df.T_star, \".\", label=\"T_inf / T_star\")\n"
         "ax.set_xlabel(\"sample\")\n"
         "ax.legend()\n"
         "fig.savefig(os.path.join(here, \"mpc_compare_ratios.png\"), dpi=150)\n";
  } else {
    s << "df = load(\"warm_start_samples.csv\")\n"
         "df = df[df.feasible == 1]\n"
         "avg = df.groupby([\"mode\", \"sample_id\"]).iters.mean()\n"
         "fig, ax = plt.subplots()\n"
         "ax.boxplot([avg[\"cold\"], avg[\"warm\"]], labels=[\"cold\", \"warm\"], showmeans=True)\n"
         "ax.set_ylabel(\"average iterations per solve\")\n"
         "fig.savefig(os.path.join(here, \"warm_start_iterations.png\"), dpi=150)\n\n"
         "fig, ax = plt.subplots()\n"
         "warm = load(\"warm_start_samples.csv\")\n"
         "warm = warm[warm[\"mode\"] == \"warm\"]\n"
         "for sid, run in list(warm.groupby(\"sample_id\"))[:4]:\n"
         "    ax.plot(run.step, run.T_inf, marker=\"o\", label=f\"sample {sid}\")\n"
         "ax.set_xlabel(\"step\")\n"
         "ax.set_ylabel(\"T_inf\")\n"
         "ax.legend()\n"
         "fig.savefig(os.path.join(here, \"warm_start_horizon.png\"), dpi=150)\n";
  }
  return s.str();
}

}  // namespace clqr
