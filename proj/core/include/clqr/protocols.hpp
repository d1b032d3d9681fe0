#pragma once

#include "clqr/afbs.hpp"
#include "clqr/closed_loop.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace clqr {

/// Gaussian proposal for initial states, filtered by feasibility.
struct SamplingSpec {
  Vector mean;
  Vector stddev;
  std::size_t T_cap = 40;
  std::size_t oversample = 10;

  /// Normal around (-3, 0.3) with covariance diag(4, 0.4).
  static SamplingSpec toy();
  /// Zero mean, stddev 0.3 times the extent of the state box per component.
  static SamplingSpec for_problem(const LtiProblem& problem);
};

/// Draws until `count` states pass the filter (state constraints hold and
/// is_feasible_start) or count * oversample draws were made; may return
/// fewer than `count`.
std::vector<Vector> sample_initial_states(const ClqrSolver& solver, const SamplingSpec& spec,
                                          std::size_t count, std::uint64_t seed);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
Summary summarize(std::vector<double> values);

struct HistogramSample {
  std::size_t id = 0;
  Vector x_init;
  bool converged = false;
  std::size_t T_inf = 0;
  std::size_t iterations = 0;
  double objective = 0.0;
};

struct HistogramReport {
  std::vector<HistogramSample> samples;
  Summary T_inf;
  Summary iterations;
};

HistogramReport run_histogram(const ClqrSolver& solver, const SolverOptions& options,
                              const std::vector<Vector>& starts);

inline constexpr std::size_t kMpcScenarioCount = 6;

struct MpcCompareSample {
  std::size_t id = 0;
  Vector x_init;
  bool feasible = false;  ///< T_min and T_star were found
  std::size_t T_min = 0;
  std::size_t T_star = 0;
  /// Scenario order: (T_min, terminal), (T_min, free), (2 T_min, terminal),
  /// (2 T_min, free), (T_star, terminal), (T_star, free).
  std::size_t mpc_iterations[kMpcScenarioCount] = {};
  bool mpc_feasible[kMpcScenarioCount] = {};
  bool clqr_w_converged = false;
  std::size_t T_inf_w = 0;
  std::size_t iters_clqr_w = 0;
  bool clqr_converged = false;
  std::size_t T_inf = 0;
  std::size_t iters_clqr = 0;
};

struct MpcCompareReport {
  std::vector<MpcCompareSample> samples;
  double median_iters_mpc[kMpcScenarioCount] = {};
  double median_iters_clqr_w = 0.0;
  double median_iters_clqr = 0.0;
  double median_ratio_Tinf_Tstar = 0.0;
  double median_ratio_Tinf_w_Tstar = 0.0;
  double median_ratio_Tmin_Tstar = 0.0;
  double min_ratio_Tmin_Tstar = 0.0;
};

const char* mpc_scenario_name(std::size_t index);

/// `solver` holds the weighted problem; the unweighted CLQR variant and all
/// MPC scenarios use w = 1. T_cap bounds the T_min / T_star scans.
MpcCompareReport run_mpc_compare(const ClqrSolver& solver, const SolverOptions& options,
                                 const std::vector<Vector>& starts, std::size_t T_cap);

struct WarmStartReport {
  double perturbation = 0.0;
  std::vector<ClosedLoopRun> cold;
  std::vector<ClosedLoopRun> warm;
  /// Average iterations per solve of each run, over its feasible steps.
  Summary cold_run_average;
  Summary warm_run_average;
  /// Iterations of every feasible solve after the first one of each run.
  Summary cold_iterations;
  Summary warm_iterations;
};

/// Cold and warm closed-loop runs from every start, sharing the
/// perturbation seed `seed + index` per start. Each step is screened with
/// is_feasible_start at `feasibility_horizon` (0 disables the screen).
WarmStartReport run_warm_start(const ClqrSolver& solver, const SolverOptions& options,
                               const std::vector<Vector>& starts, double perturbation,
                               std::size_t steps, std::uint64_t seed,
                               std::size_t feasibility_horizon = 40);

/// Draws states like sample_initial_states and keeps those whose cold
/// closed-loop run (perturbation seed `seed + accepted index`) stays
/// feasible for every step.
std::vector<Vector> sample_closed_loop_starts(const ClqrSolver& solver,
                                              const SolverOptions& options,
                                              const SamplingSpec& spec, std::size_t count,
                                              double perturbation, std::size_t steps,
                                              std::uint64_t seed);

/// CSV writers. `preamble` is written verbatim as a leading comment line.
void write_histogram_samples(std::ostream& out, const HistogramReport& report,
                             const std::string& preamble);
void write_histogram_aggregate(std::ostream& out, const HistogramReport& report,
                               const std::string& preamble);
void write_mpc_compare_samples(std::ostream& out, const MpcCompareReport& report,
                               const std::string& preamble);
void write_mpc_compare_aggregate(std::ostream& out, const MpcCompareReport& report,
                                 const std::string& preamble);
/// Mean iteration counts grouped by T_min (one row per T_min value).
void write_mpc_compare_by_tmin(std::ostream& out, const MpcCompareReport& report,
                               const std::string& preamble);
void write_warm_start_samples(std::ostream& out, const WarmStartReport& report,
                              const std::string& preamble);
void write_warm_start_aggregate(std::ostream& out, const WarmStartReport& report,
                                const std::string& preamble);

/// Python/matplotlib script that renders the CSVs of `protocol`
/// ("histogram", "mpc-compare" or "warm-start") found next to it.
std::string plot_script(const std::string& protocol);

}  // namespace clqr
