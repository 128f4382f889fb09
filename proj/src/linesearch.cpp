#include "lrmc/linesearch.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrmc {

QuarticCoeffs quartic_coeffs(const FactorPair &x, const TangentVector &eta,
                             const Problem &prob) {
  require(x.n() == prob.n() && x.m() == prob.m() && x.rank() == prob.rank(),
          "quartic_coeffs: point shape does not match the problem");
  require(eta.zG.rows() == x.n() && eta.zH.rows() == x.m() &&
              eta.zG.cols() == x.rank() && eta.zH.cols() == x.rank(),
          "quartic_coeffs: direction shape does not match the point");
  const SampleIndex &omega = *prob.omega().index();
  const auto observed = prob.omega().values();
  const std::vector<Scalar> p0 = sampled_product(x.G(), x.H(), omega);
  const std::vector<Scalar> p1a = sampled_product(x.G(), eta.zH, omega);
  const std::vector<Scalar> p1b = sampled_product(eta.zG, x.H(), omega);
  const std::vector<Scalar> p2 = sampled_product(eta.zG, eta.zH, omega);

  QuarticCoeffs q;
  Scalar r00 = 0, r01 = 0, r11 = 0, r02 = 0, r12 = 0, r22 = 0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const Scalar r0 = p0[k] - observed[k];
    const Scalar r1 = p1a[k] + p1b[k];
    const Scalar r2 = p2[k];
    r00 += r0 * r0;
    r01 += r0 * r1;
    r11 += r1 * r1;
    r02 += r0 * r2;
    r12 += r1 * r2;
    r22 += r2 * r2;
  }
  q.a0 = r00;
  q.a1 = 2.0 * r01;
  q.a2 = r11 + 2.0 * r02;
  q.a3 = 2.0 * r12;
  q.a4 = r22;
  return q;
}

namespace {

Scalar eval_cubic(Scalar c3, Scalar c2, Scalar c1, Scalar c0, Scalar t) {
  return ((c3 * t + c2) * t + c1) * t + c0;
}

Scalar polish(Scalar c3, Scalar c2, Scalar c1, Scalar c0, Scalar t) {
  for (int it = 0; it < 3; ++it) {
    const Scalar p = eval_cubic(c3, c2, c1, c0, t);
    const Scalar dp = (3 * c3 * t + 2 * c2) * t + c1;
    if (p == 0.0 || dp == 0.0) break;
    const Scalar next = t - p / dp;
    if (!std::isfinite(next) ||
        std::abs(eval_cubic(c3, c2, c1, c0, next)) >= std::abs(p))
      break;
    t = next;
  }
  return t;
}

void quadratic_roots(Scalar a, Scalar b, Scalar c, std::vector<Scalar> &out) {
  const Scalar disc = b * b - 4 * a * c;
  const Scalar slack = 1e-14 * (b * b + std::abs(4 * a * c));
  if (disc < -slack) return;
  const Scalar sq = std::sqrt(std::max(disc, 0.0));
  const Scalar q = -0.5 * (b + std::copysign(sq, b));
  if (q == 0.0) {
    out.push_back(0.0);  // b = 0 and c = 0: double root at zero
    return;
  }
  out.push_back(q / a);
  out.push_back(c / q);
}

}  // namespace

std::vector<Scalar> cubic_real_roots(Scalar c3, Scalar c2, Scalar c1, Scalar c0) {
  const Scalar maxc =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (maxc == 0.0) throw ArgumentError("cubic_real_roots: zero polynomial");

  // Substitute t = s u with s bounding the root magnitudes, so the monic
  // polynomial in u has coefficients of order one regardless of the step scale.
  std::vector<Scalar> roots;
  Scalar s = 0.0;
  if (c3 != 0.0) {
    s = std::max({std::abs(c2 / c3), std::sqrt(std::abs(c1 / c3)), std::cbrt(std::abs(c0 / c3))});
  }
  if (c3 != 0.0 && std::isfinite(s) && s > 0.0) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 0) = -c2 / (c3 * s);
    companion(0, 1) = -c1 / (c3 * s * s);
    companion(0, 2) = -c0 / (c3 * s * s * s);
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> eig(companion, false);
    for (Index k = 0; k < 3; ++k) {
      const std::complex<Scalar> lambda = eig.eigenvalues()(k);
      if (std::abs(lambda.imag()) <= 1e-6 * std::max(1.0, std::abs(lambda)))
        roots.push_back(polish(c3, c2, c1, c0, s * lambda.real()));
    }
  } else if (c3 == 0.0 && c2 != 0.0) {
    quadratic_roots(c2, c1, c0, roots);
    for (Scalar &t : roots) t = polish(0.0, c2, c1, c0, t);
  } else if (c3 == 0.0 && c1 != 0.0) {
    roots.push_back(-c0 / c1);
  } else if (c3 == 0.0) {
    return {};  // nonzero constant
  } else {
    roots.push_back(0.0);  // c3 t^3 only
  }

  // Keep only candidates that are roots of the full polynomial, relative to
  // the size of its terms at t.
  std::vector<Scalar> accepted;
  for (Scalar t : roots) {
    const Scalar a = std::abs(t);
    const Scalar terms = ((std::abs(c3) * a + std::abs(c2)) * a + std::abs(c1)) * a + std::abs(c0);
    if (std::isfinite(t) && std::abs(eval_cubic(c3, c2, c1, c0, t)) <= 2.5e-11 * terms)
      accepted.push_back(t);
  }
  std::sort(accepted.begin(), accepted.end());
  std::vector<Scalar> unique;
  for (Scalar t : accepted) {
    if (unique.empty() ||
        std::abs(t - unique.back()) > 1e-9 * std::max(1.0, std::abs(t)))
      unique.push_back(t);
  }
  return unique;
}

namespace {

std::vector<Scalar> stationary_points(const QuarticCoeffs &q) {
  const Scalar c3 = 4 * q.a4, c2 = 3 * q.a3, c1 = 2 * q.a2, c0 = q.a1;
  if (c3 == 0.0 && c2 == 0.0 && c1 == 0.0 && c0 == 0.0) return {};
  return cubic_real_roots(c3, c2, c1, c0);
}

}  // namespace

Scalar exact_step(const QuarticCoeffs &q) {
  Scalar best_t = 0.0;
  Scalar best_f = q.value(0.0);
  // Ties within rounding go to the shorter step.
  const Scalar tie = 1e-14 * std::abs(q.a0);
  for (Scalar t : stationary_points(q)) {
    const Scalar f = q.value(t);
    if (f < best_f - tie || (f <= best_f + tie && std::abs(t) < std::abs(best_t))) {
      best_f = std::min(f, best_f);
      best_t = t;
    }
  }
  return best_t;
}

Scalar exact_step(const FactorPair &x, const TangentVector &eta, const Problem &prob) {
  return exact_step(quartic_coeffs(x, eta, prob));
}

Scalar exact_descent_step(const QuarticCoeffs &q) {
  Scalar best_t = 0.0;
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
  for (Scalar t : stationary_points(q)) {
    if (t <= 0.0) continue;
    const Scalar f = q.value(t);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  if (best_t <= 0.0)
    throw LinesearchFailure("exact_descent_step: no positive stationary point");
  return best_t;
}

Scalar exact_descent_step(const FactorPair &x, const TangentVector &eta,
                          const Problem &prob) {
  return exact_descent_step(quartic_coeffs(x, eta, prob));
}

ArmijoResult armijo_adaptive(const LinesearchState &state, const FactorPair &x,
                             const TangentVector &eta, const Problem &prob,
                             Scalar slope, Scalar current_cost) {
  require(slope < 0.0, "armijo_adaptive: direction is not a descent direction");
  Scalar step = state.seeded ? state.initial_guess : exact_descent_step(x, eta, prob);
  require(step > 0.0 && std::isfinite(step), "armijo_adaptive: invalid initial step");

  for (int backtracks = 0; backtracks <= kMaxBacktracks; ++backtracks) {
    const FactorPair trial(x.G() + step * eta.zG, x.H() + step * eta.zH);
    if (trial.full_rank()) {
      const Scalar c = cost(trial, prob);
      if (c <= current_cost + kArmijoC1 * step * slope) {
        ArmijoResult out;
        out.step = step;
        out.cost = c;
        out.point = trial;
        out.backtracks = backtracks;
        out.next.seeded = true;
        out.next.initial_guess = backtracks == 0 ? 2.0 * step : step;
        return out;
      }
    }
    step *= 0.5;
  }
  throw LinesearchFailure("armijo_adaptive: no sufficient decrease after " +
                          std::to_string(kMaxBacktracks) + " halvings");
}

TrustRadius initial_tr_radius(const FactorPair &x0, const Problem &prob,
                              MetricKind kind) {
  const TangentVector grad = riemannian_gradient(x0, prob, kind);
  const Scalar gnorm = metric_norm(x0, grad, kind);
  if (gnorm == 0.0) return {};
  const Scalar t0 = exact_descent_step(x0, -grad, prob);
  const Scalar delta0 = t0 * gnorm;
  return {delta0, 1024.0 * delta0};
}

}  // namespace lrmc
