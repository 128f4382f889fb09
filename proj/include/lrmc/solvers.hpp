#pragma once

#include "lrmc/linesearch.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace lrmc {

enum class Algorithm { GD, CG, TR, GS, LMaFit };

std::string_view to_string(Algorithm algo);
Algorithm algorithm_from_string(std::string_view name);

/// Step policy for gradient descent.
enum class StepPolicy {
  Adaptive,  ///< Armijo backtracking, seeded once by the exact step
  Exact,     ///< exact descent step at every iteration
  Fixed,     ///< constant step `fixed_step`
};

struct TrustRegionConfig {
  Scalar theta = 1.0;  ///< superlinear exponent in the inner stopping rule
  Scalar kappa = 0.9;  ///< linear factor in the inner stopping rule
  /// 0 selects the quotient dimension (n + m) r - r^2.
  Index max_inner = 0;
  Scalar accept_ratio = 0.1;
};

struct SolverConfig {
  Algorithm algo = Algorithm::CG;
  MetricKind metric = MetricKind::Scaled;
  int max_iters = 500;
  Scalar cost_tol = 1e-20;
  Scalar grad_tol = 1e-12;
  unsigned long long seed = 0;
  Scalar omega_relax = 1.5;
  StepPolicy gd_step = StepPolicy::Adaptive;
  Scalar fixed_step = 1.0;
  TrustRegionConfig tr;

  /// Throws ArgumentError when a field is out of range.
  void validate() const;
};

enum class Status { CostTol, GradTol, MaxIters, LinesearchFailure, Degenerate };

std::string_view to_string(Status status);

struct IterationRecord {
  int iter = 0;
  double wall_time_s = 0.0;
  Scalar cost = 0.0;
  Scalar grad_norm = 0.0;
  /// Step size for line-search methods, trust radius for TR; NaN at iter 0.
  Scalar step_or_radius = std::numeric_limits<Scalar>::quiet_NaN();
  std::optional<Index> inner_iters;
  std::optional<Scalar> rho;
  /// False only for rejected trust-region steps.
  bool accepted = true;
};

struct Trace {
  std::vector<IterationRecord> records;
  Status status = Status::MaxIters;
  std::string message;

  /// Index of the first record with cost <= threshold, if any.
  std::optional<int> iterations_to(Scalar threshold) const;
  /// Costs of the initial point and of every accepted iterate.
  std::vector<Scalar> accepted_costs() const;
};

struct SolveResult {
  FactorPair point;
  Trace trace;
};

SolveResult solve_gd(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);
SolveResult solve_cg(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);
SolveResult solve_tr(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);
SolveResult solve_gs(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);
SolveResult solve_lmafit(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);

/// Dispatches on cfg.algo.
SolveResult solve(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg);

using HessianOperator = std::function<TangentVector(const TangentVector &)>;

struct TcgResult {
  TangentVector eta;
  TangentVector Heta;
  Index inner_iters = 0;
  bool boundary_hit = false;
  bool negative_curvature = false;
  /// m(0) - m(eta) = -(<grad, eta> + 0.5 <eta, H eta>).
  Scalar model_decrease = 0.0;
};

/// Steihaug-Toint truncated CG for
///   min <grad, eta> + 0.5 <eta, H eta>  s.t. ||eta|| <= delta
/// with inner product and norm of `kind` at x. Stops on the trust-region
/// boundary, on negative curvature (following it to the boundary), or when
/// ||r|| <= ||r0|| min(||r0||^theta, kappa).
TcgResult tcg_subproblem(const FactorPair &x, const TangentVector &grad,
                         const HessianOperator &hess, Scalar delta,
                         const TrustRegionConfig &cfg,
                         MetricKind kind = MetricKind::Scaled);

/// One simultaneous Gauss-Seidel / LMaFit update with relaxation omega
/// (omega = 1 is plain GS). Throws SingularityError on rank loss of x.
FactorPair relaxed_gs_step(const FactorPair &x, const Problem &prob, Scalar omega);

}  // namespace lrmc
