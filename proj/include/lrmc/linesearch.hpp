#pragma once

#include "lrmc/cost.hpp"

#include <vector>

namespace lrmc {

/// f(t) = a0 + a1 t + a2 t^2 + a3 t^3 + a4 t^4, the unnormalized sum of
/// squared residuals along the retraction (G + t eta_G)(H + t eta_H)^T.
struct QuarticCoeffs {
  Scalar a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0;

  Scalar value(Scalar t) const { return a0 + t * (a1 + t * (a2 + t * (a3 + t * a4))); }
  Scalar derivative(Scalar t) const {
    return a1 + t * (2 * a2 + t * (3 * a3 + t * 4 * a4));
  }
};

QuarticCoeffs quartic_coeffs(const FactorPair &x, const TangentVector &eta,
                             const Problem &prob);

/// Real roots of c3 t^3 + c2 t^2 + c1 t + c0, ascending, at most three.
/// Degree drops only when leading coefficients are exactly zero. Throws
/// ArgumentError for the zero polynomial.
std::vector<Scalar> cubic_real_roots(Scalar c3, Scalar c2, Scalar c1, Scalar c0);

/// Global minimizer over all real t of the quartic (t = 0 is always a
/// candidate; ties within rounding go to the smaller |t|). Returns 0 when
/// f' is identically zero.
Scalar exact_step(const QuarticCoeffs &q);
Scalar exact_step(const FactorPair &x, const TangentVector &eta, const Problem &prob);

/// Minimizer restricted to t > 0, as used by descent methods. Throws
/// LinesearchFailure if f' has no positive real root.
Scalar exact_descent_step(const QuarticCoeffs &q);
Scalar exact_descent_step(const FactorPair &x, const TangentVector &eta,
                          const Problem &prob);

/// Guess carried between Armijo linesearches of one solver run.
struct LinesearchState {
  bool seeded = false;
  Scalar initial_guess = 0.0;
};

struct ArmijoResult {
  Scalar step = 0.0;
  Scalar cost = 0.0;
  FactorPair point;
  int backtracks = 0;
  LinesearchState next;
};

inline constexpr Scalar kArmijoC1 = 1e-4;
inline constexpr int kMaxBacktracks = 50;

/// Backtracking (halving) Armijo search along eta from x. An unseeded state
/// starts from the exact descent step; afterwards the next guess is twice
/// the accepted step if it was accepted at the first trial, and the accepted
/// step otherwise. `slope` is d/dt cost(retract(x, eta, t)) at 0 and must be
/// negative. Throws LinesearchFailure after kMaxBacktracks halvings.
ArmijoResult armijo_adaptive(const LinesearchState &state, const FactorPair &x,
                             const TangentVector &eta, const Problem &prob,
                             Scalar slope, Scalar current_cost);

struct TrustRadius {
  Scalar initial = 0.0;
  Scalar max = 0.0;
};

/// delta0 = t0 ||grad||, t0 the exact descent step along -grad and the norm
/// taken in `kind`; max = 2^10 delta0. Both zero at a stationary point.
TrustRadius initial_tr_radius(const FactorPair &x0, const Problem &prob,
                              MetricKind kind = MetricKind::Scaled);

}  // namespace lrmc
