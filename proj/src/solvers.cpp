#include "lrmc/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace lrmc {

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::GD: return "gd";
    case Algorithm::CG: return "cg";
    case Algorithm::TR: return "tr";
    case Algorithm::GS: return "gs";
    case Algorithm::LMaFit: return "lmafit";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "gd") return Algorithm::GD;
  if (name == "cg") return Algorithm::CG;
  if (name == "tr") return Algorithm::TR;
  if (name == "gs") return Algorithm::GS;
  if (name == "lmafit") return Algorithm::LMaFit;
  throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::CostTol: return "CostTol";
    case Status::GradTol: return "GradTol";
    case Status::MaxIters: return "MaxIters";
    case Status::LinesearchFailure: return "LinesearchFailure";
    case Status::Degenerate: return "Degenerate";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
  require(cost_tol >= 0.0, "SolverConfig: cost_tol must be >= 0");
  require(grad_tol >= 0.0, "SolverConfig: grad_tol must be >= 0");
  require(omega_relax >= 1.0, "SolverConfig: omega_relax must be >= 1");
  require(gd_step != StepPolicy::Fixed || fixed_step > 0.0,
          "SolverConfig: fixed_step must be positive");
  require(tr.kappa > 0.0 && tr.kappa < 1.0, "SolverConfig: tr.kappa must lie in (0, 1)");
  require(tr.theta >= 0.0, "SolverConfig: tr.theta must be >= 0");
  require(tr.max_inner >= 0, "SolverConfig: tr.max_inner must be >= 0");
}

std::optional<int> Trace::iterations_to(Scalar threshold) const {
  for (const auto &rec : records)
    if (rec.cost <= threshold) return rec.iter;
  return std::nullopt;
}

std::vector<Scalar> Trace::accepted_costs() const {
  std::vector<Scalar> out;
  for (const auto &rec : records)
    if (rec.accepted) out.push_back(rec.cost);
  return out;
}

namespace {

class Recorder {
 public:
  explicit Recorder(Trace &trace)
      : trace_(trace), start_(std::chrono::steady_clock::now()) {}

  IterationRecord &add(int iter, Scalar cost, Scalar grad_norm) {
    IterationRecord rec;
    rec.iter = iter;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    rec.cost = cost;
    rec.grad_norm = grad_norm;
    trace_.records.push_back(rec);
    return trace_.records.back();
  }

 private:
  Trace &trace_;
  std::chrono::steady_clock::time_point start_;
};

/// Applies the stopping rules; returns true (and sets the status) when the
/// run must end before iteration `next_iter`.
bool should_stop(Trace &trace, Scalar cost, Scalar grad_norm, int next_iter,
                 const SolverConfig &cfg) {
  if (cost <= cfg.cost_tol) {
    trace.status = Status::CostTol;
    return true;
  }
  if (grad_norm <= cfg.grad_tol) {
    trace.status = Status::GradTol;
    return true;
  }
  if (next_iter > cfg.max_iters) {
    trace.status = Status::MaxIters;
    return true;
  }
  return false;
}

void check_start(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  cfg.validate();
  require(x0.n() == prob.n() && x0.m() == prob.m() && x0.rank() == prob.rank(),
          "solver: initial point shape does not match the problem");
}

/// Records a degenerate start and returns true if x0 is rank deficient.
bool degenerate_start(const FactorPair &x0, const Problem &prob, SolveResult &out) {
  if (x0.full_rank()) return false;
  Recorder rec(out.trace);
  rec.add(0, cost(x0, prob), std::numeric_limits<Scalar>::quiet_NaN());
  out.trace.status = Status::Degenerate;
  out.trace.message = "initial point is not of full column rank";
  return true;
}

}  // namespace

SolveResult solve_gd(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  check_start(prob, x0, cfg);
  SolveResult out{x0, {}};
  if (degenerate_start(x0, prob, out)) return out;
  Trace &trace = out.trace;
  Recorder rec(trace);

  FactorPair x = x0;
  GradientEval ev = evaluate(x, prob, cfg.metric);
  Scalar gnorm = metric_norm(x, ev.rgrad, cfg.metric);
  rec.add(0, ev.cost, gnorm);

  LinesearchState state;
  for (int iter = 1; !should_stop(trace, ev.cost, gnorm, iter, cfg); ++iter) {
    const TangentVector eta = -ev.rgrad;
    const Scalar slope = directional_derivative(ev.egrad, eta);
    Scalar step = 0.0;
    try {
      if (!(slope < 0.0))
        throw LinesearchFailure("gradient direction is not a descent direction");
      switch (cfg.gd_step) {
        case StepPolicy::Adaptive: {
          ArmijoResult ls = armijo_adaptive(state, x, eta, prob, slope, ev.cost);
          state = ls.next;
          step = ls.step;
          x = std::move(ls.point);
          break;
        }
        case StepPolicy::Exact:
          step = exact_descent_step(x, eta, prob);
          x = retract(x, eta, step);
          break;
        case StepPolicy::Fixed:
          step = cfg.fixed_step;
          x = retract(x, eta, step);
          break;
      }
    } catch (const LinesearchFailure &e) {
      trace.status = Status::LinesearchFailure;
      trace.message = e.what();
      break;
    } catch (const DegeneratePointError &e) {
      trace.status = Status::Degenerate;
      trace.message = e.what();
      break;
    }
    ev = evaluate(x, prob, cfg.metric);
    gnorm = metric_norm(x, ev.rgrad, cfg.metric);
    rec.add(iter, ev.cost, gnorm).step_or_radius = step;
  }
  out.point = std::move(x);
  return out;
}

SolveResult solve_cg(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  check_start(prob, x0, cfg);
  SolveResult out{x0, {}};
  if (degenerate_start(x0, prob, out)) return out;
  Trace &trace = out.trace;
  Recorder rec(trace);
  const MetricKind kind = cfg.metric;

  FactorPair x = x0;
  GradientEval ev = evaluate(x, prob, kind);
  Scalar gg = metric(x, ev.rgrad, ev.rgrad, kind);
  Scalar gnorm = std::sqrt(std::max(gg, 0.0));
  rec.add(0, ev.cost, gnorm);

  TangentVector dir = -ev.rgrad;
  for (int iter = 1; !should_stop(trace, ev.cost, gnorm, iter, cfg); ++iter) {
    if (!(directional_derivative(ev.egrad, dir) < 0.0)) dir = -ev.rgrad;
    Scalar step = 0.0;
    FactorPair next;
    try {
      step = exact_descent_step(x, dir, prob);
      next = retract(x, dir, step);
    } catch (const LinesearchFailure &e) {
      trace.status = Status::LinesearchFailure;
      trace.message = e.what();
      break;
    } catch (const DegeneratePointError &e) {
      trace.status = Status::Degenerate;
      trace.message = e.what();
      break;
    }

    GradientEval ev_next = evaluate(next, prob, kind);
    const TangentVector moved_dir = transport(x, next, dir);
    const TangentVector moved_grad = transport(x, next, ev.rgrad);
    const Scalar gg_next = metric(next, ev_next.rgrad, ev_next.rgrad, kind);
    const Scalar g_moved = metric(next, ev_next.rgrad, moved_grad, kind);
    // Polak-Ribiere+, denominator from the previous iterate.
    const Scalar beta = gg > 0.0 ? std::max(0.0, (gg_next - g_moved) / gg) : 0.0;

    dir = -ev_next.rgrad;
    dir.axpy(beta, moved_dir);
    if (!(directional_derivative(ev_next.egrad, dir) < 0.0)) dir = -ev_next.rgrad;

    x = std::move(next);
    ev = std::move(ev_next);
    gg = gg_next;
    gnorm = std::sqrt(std::max(gg, 0.0));
    rec.add(iter, ev.cost, gnorm).step_or_radius = step;
  }
  out.point = std::move(x);
  return out;
}

TcgResult tcg_subproblem(const FactorPair &x, const TangentVector &grad,
                         const HessianOperator &hess, Scalar delta,
                         const TrustRegionConfig &cfg, MetricKind kind) {
  require(delta > 0.0, "tcg_subproblem: trust radius must be positive");
  const auto inner = [&](const TangentVector &a, const TangentVector &b) {
    return metric(x, a, b, kind);
  };
  const Index max_inner =
      cfg.max_inner > 0 ? cfg.max_inner
                        : (x.n() + x.m()) * x.rank() - x.rank() * x.rank();

  TcgResult out;
  out.eta = TangentVector::zeros_like(x);
  out.Heta = TangentVector::zeros_like(x);

  TangentVector r = grad;
  Scalar r_r = inner(r, r);
  const Scalar norm_r0 = std::sqrt(r_r);
  if (norm_r0 == 0.0) return out;
  const Scalar target = norm_r0 * std::min(std::pow(norm_r0, cfg.theta), cfg.kappa);

  TangentVector d = -r;
  Scalar e_e = 0.0;  // <eta, eta>
  Scalar e_d = 0.0;  // <eta, d>
  Scalar d_d = r_r;  // <d, d>
  Scalar model = 0.0;  // <grad, eta> + 0.5 <eta, H eta>
  const Scalar delta2 = delta * delta;

  for (Index j = 0; j < max_inner; ++j) {
    const TangentVector Hd = hess(d);
    const Scalar d_Hd = inner(d, Hd);
    const Scalar alpha = r_r / d_Hd;
    const Scalar e_e_new = e_e + 2.0 * alpha * e_d + alpha * alpha * d_d;
    out.inner_iters = j + 1;

    if (!(d_Hd > 0.0) || e_e_new >= delta2) {
      const Scalar tau =
          (-e_d + std::sqrt(std::max(0.0, e_d * e_d + d_d * (delta2 - e_e)))) / d_d;
      out.eta.axpy(tau, d);
      out.Heta.axpy(tau, Hd);
      out.boundary_hit = true;
      out.negative_curvature = !(d_Hd > 0.0);
      break;
    }

    TangentVector eta_new = out.eta;
    eta_new.axpy(alpha, d);
    TangentVector Heta_new = out.Heta;
    Heta_new.axpy(alpha, Hd);
    const Scalar model_new = inner(grad, eta_new) + 0.5 * inner(eta_new, Heta_new);
    if (model_new > model) break;  // roundoff in the Hessian; keep the last iterate
    out.eta = std::move(eta_new);
    out.Heta = std::move(Heta_new);
    model = model_new;
    e_e = e_e_new;

    r.axpy(alpha, Hd);
    const Scalar r_r_new = inner(r, r);
    if (std::sqrt(r_r_new) <= target) break;

    const Scalar beta = r_r_new / r_r;
    d *= beta;
    d -= r;
    e_d = beta * (e_d + alpha * d_d);
    d_d = r_r_new + beta * beta * d_d;
    r_r = r_r_new;
  }

  out.model_decrease = -(inner(grad, out.eta) + 0.5 * inner(out.eta, out.Heta));
  if (out.model_decrease < 0.0) {
    // Only reachable through roundoff on the boundary branch.
    out.eta = TangentVector::zeros_like(x);
    out.Heta = TangentVector::zeros_like(x);
    out.model_decrease = 0.0;
  }
  return out;
}

SolveResult solve_tr(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  check_start(prob, x0, cfg);
  SolveResult out{x0, {}};
  if (degenerate_start(x0, prob, out)) return out;
  Trace &trace = out.trace;
  Recorder rec(trace);
  const MetricKind kind = cfg.metric;

  FactorPair x = x0;
  GradientEval ev = evaluate(x, prob, kind);
  Scalar gnorm = metric_norm(x, ev.rgrad, kind);
  rec.add(0, ev.cost, gnorm);
  if (should_stop(trace, ev.cost, gnorm, 1, cfg)) return out;

  TrustRadius radius;
  try {
    radius = initial_tr_radius(x, prob, kind);
  } catch (const LinesearchFailure &e) {
    trace.status = Status::LinesearchFailure;
    trace.message = e.what();
    return out;
  }
  if (radius.initial <= 0.0) {
    trace.status = Status::GradTol;
    return out;
  }
  Scalar delta = radius.initial;

  for (int iter = 1;; ++iter) {
    const FactorPair &here = x;
    const HessianOperator hess = [&](const TangentVector &v) {
      return kind == MetricKind::Scaled ? hessian_vec(here, prob, v)
                                        : fd_hessian_vec(here, prob, v, kind);
    };
    const TcgResult sub = tcg_subproblem(x, ev.rgrad, hess, delta, cfg.tr, kind);

    Scalar rho = -std::numeric_limits<Scalar>::infinity();
    std::optional<FactorPair> candidate;
    Scalar candidate_cost = ev.cost;
    FactorPair trial(x.G() + sub.eta.zG, x.H() + sub.eta.zH);
    if (trial.full_rank()) {
      candidate_cost = cost(trial, prob);
      const Scalar actual = ev.cost - candidate_cost;
      if (sub.model_decrease > 1e-300)
        rho = actual / sub.model_decrease;
      else
        rho = actual > 0.0 ? 1.0 : 0.0;
      candidate = std::move(trial);
    }

    const bool accepted = candidate.has_value() && rho > cfg.tr.accept_ratio;
    const Scalar used_delta = delta;
    if (rho < 0.25)
      delta *= 0.25;
    else if (rho > 0.75 && sub.boundary_hit)
      delta = std::min(2.0 * delta, radius.max);

    if (accepted) {
      x = std::move(*candidate);
      ev = evaluate(x, prob, kind);
      gnorm = metric_norm(x, ev.rgrad, kind);
    }
    IterationRecord &r = rec.add(iter, ev.cost, gnorm);
    r.step_or_radius = used_delta;
    r.inner_iters = sub.inner_iters;
    r.rho = rho;
    r.accepted = accepted;

    if (should_stop(trace, ev.cost, gnorm, iter + 1, cfg)) break;
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      trace.status = Status::Degenerate;
      trace.message = "trust radius collapsed";
      break;
    }
  }
  out.point = std::move(x);
  return out;
}

FactorPair relaxed_gs_step(const FactorPair &x, const Problem &prob, Scalar omega) {
  const SparseResidual S = residual(x, prob.omega());
  const Matrix gs_g = x.G() - x.solve_right_gram_h(sp_times_dense(S, x.H()));
  const Matrix gs_h = x.H() - x.solve_right_gram_g(spT_times_dense(S, x.G()));
  if (omega == 1.0) return FactorPair(gs_g, gs_h);
  return FactorPair((1.0 - omega) * x.G() + omega * gs_g,
                    (1.0 - omega) * x.H() + omega * gs_h);
}

namespace {

SolveResult run_relaxed_gs(const Problem &prob, const FactorPair &x0,
                           const SolverConfig &cfg, Scalar omega) {
  check_start(prob, x0, cfg);
  SolveResult out{x0, {}};
  if (degenerate_start(x0, prob, out)) return out;
  Trace &trace = out.trace;
  Recorder rec(trace);

  FactorPair x = x0;
  Scalar c = cost(x, prob);
  Scalar gnorm = metric_norm(x, riemannian_gradient(x, prob, cfg.metric), cfg.metric);
  rec.add(0, c, gnorm);
  for (int iter = 1; !should_stop(trace, c, gnorm, iter, cfg); ++iter) {
    FactorPair next = relaxed_gs_step(x, prob, omega);
    if (!next.full_rank()) {
      trace.status = Status::Degenerate;
      trace.message = "update lost full column rank";
      break;
    }
    x = std::move(next);
    c = cost(x, prob);
    gnorm = metric_norm(x, riemannian_gradient(x, prob, cfg.metric), cfg.metric);
    rec.add(iter, c, gnorm).step_or_radius = omega;
  }
  out.point = std::move(x);
  return out;
}

}  // namespace

SolveResult solve_gs(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  return run_relaxed_gs(prob, x0, cfg, 1.0);
}

SolveResult solve_lmafit(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  return run_relaxed_gs(prob, x0, cfg, cfg.omega_relax);
}

SolveResult solve(const Problem &prob, const FactorPair &x0, const SolverConfig &cfg) {
  switch (cfg.algo) {
    case Algorithm::GD: return solve_gd(prob, x0, cfg);
    case Algorithm::CG: return solve_cg(prob, x0, cfg);
    case Algorithm::TR: return solve_tr(prob, x0, cfg);
    case Algorithm::GS: return solve_gs(prob, x0, cfg);
    case Algorithm::LMaFit: return solve_lmafit(prob, x0, cfg);
  }
  throw ArgumentError("solve: unknown algorithm");
}

}  // namespace lrmc
