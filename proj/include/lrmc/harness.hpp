#pragma once

#include "lrmc/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lrmc {

/// Synthetic instance description.
struct GenSpec {
  Index n = 100;
  Index m = 100;
  Index rank = 2;
  Scalar os_ratio = 6.0;
  unsigned long long seed = 0;
  /// Held-out entries, as a fraction of n * m, drawn disjoint from Omega.
  Scalar test_fraction = 0.0;

  /// round(os_ratio (n + m - r) r)
  Index train_count() const;
  Index test_count() const;
  void validate() const;
};

struct GeneratedProblem {
  Problem problem;
  FactorPair truth;
};

/// Ground truth A B^T with i.i.d. standard normal A (n x r), B (m x r);
/// Omega drawn uniformly without replacement. Deterministic in spec.seed.
GeneratedProblem generate_problem(const GenSpec &spec);

/// i.i.d. standard normal factors, resampled on rank deficiency.
FactorPair init_random(Index n, Index m, Index rank, unsigned long long seed);

struct TruncatedSvd {
  Matrix U;
  Vector singular_values;
  Matrix V;
};

/// Rank-k SVD of an Omega-supported sparse matrix by block power iteration
/// with `oversample` extra columns and `iterations` power steps.
TruncatedSvd truncated_svd(const SparseResidual &A, Index k, Index oversample = 5,
                           int iterations = 30, unsigned long long seed = 0);

/// (U Sigma^{1/2}, V Sigma^{1/2}) from the rank-r SVD of (nm/|Omega|) P(X).
/// Throws DegeneratePointError when fewer than r singular values are
/// nonzero.
FactorPair init_spectral(const Problem &prob);

enum class InitKind { Random, Spectral };

std::string_view to_string(InitKind kind);
InitKind init_from_string(std::string_view name);

struct RunCell {
  Algorithm algo = Algorithm::CG;
  MetricKind metric = MetricKind::Scaled;
  InitKind init = InitKind::Random;
};

/// Parses "algo:metric:init", e.g. "cg:scaled:random". Metric and init may
/// be omitted (defaults scaled, random).
RunCell parse_cell(std::string_view text);
std::string cell_label(const RunCell &cell);

struct RunSpec {
  GenSpec gen;
  std::vector<RunCell> cells;
  SolverConfig config;
  /// Seed for random initialization, shared by every cell.
  unsigned long long init_seed = 0;
  /// Directory for CSV output; empty disables writing.
  std::string out_dir;
  /// Worker threads over cells.
  int jobs = 1;
};

struct RunOutcome {
  std::string label;
  RunCell cell;
  Trace trace;
  Scalar final_cost = 0.0;
  std::optional<Scalar> test_rmse;
  /// Set when the run raised instead of producing a trace.
  std::string error;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
};

/// Runs every cell on the same generated problem and initialization seed.
/// Errors are captured per run. Writes <out_dir>/<label>.csv per run and
/// <out_dir>/summary.csv when out_dir is set.
ExperimentResult run_experiment(const RunSpec &spec);

/// Columns iter,time_s,cost,grad_norm,step_or_radius,inner_iters,rho.
void write_trace_csv(std::ostream &out, const Trace &trace);
void write_summary_csv(std::ostream &out, const ExperimentResult &result);

/// One line of the runtime invariant report.
struct CheckResult {
  std::string name;
  Scalar worst = 0.0;
  Scalar tolerance = 0.0;
  bool passed = false;
};

/// Geometry and calculus invariants on `instances` random small problems.
std::vector<CheckResult> run_invariant_checks(unsigned long long seed, int instances);

}  // namespace lrmc
