#pragma once

#include "lrmc/geometry.hpp"
#include "lrmc/sampled_ops.hpp"

#include <optional>

namespace lrmc {

/// A fixed-rank completion instance: training samples, optional held-out
/// samples, and the target rank.
class Problem {
 public:
  /// Throws ArgumentError if the rank is out of range, the test set has
  /// different dimensions, or the two sets share an index.
  Problem(SampleSet omega, Index rank,
          std::optional<SampleSet> omega_test = std::nullopt);

  const SampleSet &omega() const { return omega_; }
  const std::optional<SampleSet> &omega_test() const { return omega_test_; }
  Index rank() const { return rank_; }
  Index n() const { return omega_.n_rows(); }
  Index m() const { return omega_.n_cols(); }

 private:
  SampleSet omega_;
  std::optional<SampleSet> omega_test_;
  Index rank_;
};

SparseResidual residual(const FactorPair &x, const SampleSet &omega);

/// (1/|Omega|) ||P(G H^T) - P(X)||^2.
Scalar cost(const FactorPair &x, const Problem &prob);

/// (S H, S^T G). Not horizontal in general.
TangentVector euclidean_gradient(const FactorPair &x, const Problem &prob);

/// Euclidean and Riemannian gradients evaluated together (they share the
/// residual).
struct GradientEval {
  Scalar cost = 0.0;
  TangentVector egrad;
  TangentVector rgrad;
};

/// Gradient with respect to the chosen metric on the total space, before any
/// horizontal projection. Scaled: (S H (H^T H)^{-1}, S^T G (G^T G)^{-1});
/// RightInvariant: (S H G^T G, S^T G H^T H).
TangentVector total_space_gradient(const FactorPair &x, const Problem &prob,
                                   MetricKind kind);

/// total_space_gradient followed by one horizontal projection.
TangentVector riemannian_gradient(const FactorPair &x, const Problem &prob,
                                  MetricKind kind);

GradientEval evaluate(const FactorPair &x, const Problem &prob, MetricKind kind);

/// d/dt cost(retract(x, eta, t)) at t = 0, i.e. <egrad, eta>_F.
Scalar directional_derivative(const TangentVector &egrad, const TangentVector &eta);

/// Riemannian Hessian-vector product for the Scaled metric:
/// Pi(D grad[eta] + connection_correction(x, eta, grad)).
TangentVector hessian_vec(const FactorPair &x, const Problem &prob,
                          const TangentVector &eta);

/// Finite-difference Hessian approximation. The directional derivative of
/// the projected gradient field is replaced by a central difference with
/// step h = 1e-6 ||x|| / ||eta||, transported back to x; the connection term
/// of the chosen metric is added analytically.
TangentVector fd_hessian_vec(const FactorPair &x, const Problem &prob,
                             const TangentVector &eta, MetricKind kind);

/// sqrt(mean((G H^T - X)^2)) over `samples`.
Scalar rmse_on(const FactorPair &x, const SampleSet &samples);

}  // namespace lrmc
