#include "lrmc/cost.hpp"

#include <algorithm>
#include <cmath>

namespace lrmc {

namespace {

bool indices_disjoint(const SampleSet &a, const SampleSet &b) {
  // Both are in canonical row-major order.
  std::size_t i = 0, j = 0;
  const auto ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  while (i < a.size() && j < b.size()) {
    if (ar[i] == br[j] && ac[i] == bc[j]) return false;
    if (ar[i] < br[j] || (ar[i] == br[j] && ac[i] < bc[j]))
      ++i;
    else
      ++j;
  }
  return true;
}

void check_point(const FactorPair &x, const Problem &prob, const char *what) {
  require(x.n() == prob.n() && x.m() == prob.m() && x.rank() == prob.rank(),
          std::string(what) + ": point shape does not match the problem");
}

}  // namespace

Problem::Problem(SampleSet omega, Index rank, std::optional<SampleSet> omega_test)
    : omega_(std::move(omega)), omega_test_(std::move(omega_test)), rank_(rank) {
  require(rank_ >= 1 && rank_ <= std::min(omega_.n_rows(), omega_.n_cols()),
          "Problem: rank must satisfy 1 <= r <= min(n, m)");
  if (omega_test_) {
    require(omega_test_->n_rows() == omega_.n_rows() &&
                omega_test_->n_cols() == omega_.n_cols(),
            "Problem: test samples have different dimensions");
    require(indices_disjoint(omega_, *omega_test_),
            "Problem: training and test samples overlap");
  }
}

SparseResidual residual(const FactorPair &x, const SampleSet &omega) {
  return residual(x.G(), x.H(), omega);
}

Scalar cost(const FactorPair &x, const Problem &prob) {
  check_point(x, prob, "cost");
  const SampleSet &omega = prob.omega();
  if (omega.empty()) return 0.0;
  const std::vector<Scalar> pred = sampled_product(x.G(), x.H(), omega);
  const auto observed = omega.values();
  Scalar acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const Scalar d = pred[k] - observed[k];
    acc += d * d;
  }
  return acc / static_cast<Scalar>(omega.size());
}

TangentVector euclidean_gradient(const FactorPair &x, const Problem &prob) {
  check_point(x, prob, "euclidean_gradient");
  const SparseResidual S = residual(x, prob.omega());
  return {sp_times_dense(S, x.H()), spT_times_dense(S, x.G())};
}

namespace {

TangentVector scale_gradient(const FactorPair &x, const TangentVector &egrad,
                             MetricKind kind) {
  switch (kind) {
    case MetricKind::Scaled:
      return {x.solve_right_gram_h(egrad.zG), x.solve_right_gram_g(egrad.zH)};
    case MetricKind::RightInvariant:
      return {egrad.zG * x.gram_g(), egrad.zH * x.gram_h()};
  }
  return egrad;
}

}  // namespace

TangentVector total_space_gradient(const FactorPair &x, const Problem &prob,
                                   MetricKind kind) {
  return scale_gradient(x, euclidean_gradient(x, prob), kind);
}

TangentVector riemannian_gradient(const FactorPair &x, const Problem &prob,
                                  MetricKind kind) {
  return project_horizontal(x, total_space_gradient(x, prob, kind));
}

GradientEval evaluate(const FactorPair &x, const Problem &prob, MetricKind kind) {
  check_point(x, prob, "evaluate");
  const SampleSet &omega = prob.omega();
  require(!omega.empty(), "evaluate: empty sample set");
  std::vector<Scalar> vals = sampled_product(x.G(), x.H(), omega);
  const auto observed = omega.values();
  const Scalar count = static_cast<Scalar>(omega.size());
  Scalar acc = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const Scalar d = vals[k] - observed[k];
    acc += d * d;
    vals[k] = (2.0 / count) * d;
  }
  const SparseResidual S(omega.index(), std::move(vals));
  GradientEval out;
  out.cost = acc / count;
  out.egrad = {sp_times_dense(S, x.H()), spT_times_dense(S, x.G())};
  out.rgrad = project_horizontal(x, scale_gradient(x, out.egrad, kind));
  return out;
}

Scalar directional_derivative(const TangentVector &egrad, const TangentVector &eta) {
  return (egrad.zG.array() * eta.zG.array()).sum() +
         (egrad.zH.array() * eta.zH.array()).sum();
}

TangentVector hessian_vec(const FactorPair &x, const Problem &prob,
                          const TangentVector &eta) {
  check_point(x, prob, "hessian_vec");
  const SampleSet &omega = prob.omega();
  const Matrix &G = x.G();
  const Matrix &H = x.H();

  const SparseResidual S = residual(x, omega);
  const Matrix SH = sp_times_dense(S, H);
  const Matrix StG = spT_times_dense(S, G);

  // S' = (2/|Omega|) P(eta_G H^T + G eta_H^T)
  std::vector<Scalar> dvals = sampled_product(eta.zG, H, omega);
  {
    const std::vector<Scalar> b = sampled_product(G, eta.zH, omega);
    const Scalar scale = 2.0 / static_cast<Scalar>(omega.size());
    for (std::size_t k = 0; k < dvals.size(); ++k)
      dvals[k] = scale * (dvals[k] + b[k]);
  }
  const SparseResidual dS(omega.index(), std::move(dvals));

  // grad_G = S H W_H. Product rule, with D W_H[eta] = -W_H (eta_H^T H + H^T eta_H) W_H:
  //   D grad_G = [S' H + S eta_H - S H W_H (eta_H^T H + H^T eta_H)] W_H
  // and for grad_H = S^T G W_G:
  //   D grad_H = [S'^T G + S^T eta_G - S^T G W_G (eta_G^T G + G^T eta_G)] W_G
  const Matrix dh = eta.zH.transpose() * H + H.transpose() * eta.zH;
  const Matrix dg = eta.zG.transpose() * G + G.transpose() * eta.zG;
  const Matrix grad_g = x.solve_right_gram_h(SH);
  const Matrix grad_h = x.solve_right_gram_g(StG);

  TangentVector dgrad{
      x.solve_right_gram_h(sp_times_dense(dS, H) + sp_times_dense(S, eta.zH) -
                           grad_g * dh),
      x.solve_right_gram_g(spT_times_dense(dS, G) + spT_times_dense(S, eta.zG) -
                           grad_h * dg)};

  const TangentVector grad{grad_g, grad_h};
  dgrad += connection_correction(x, eta, grad);
  return project_horizontal(x, dgrad);
}

TangentVector fd_hessian_vec(const FactorPair &x, const Problem &prob,
                             const TangentVector &eta, MetricKind kind) {
  check_point(x, prob, "fd_hessian_vec");
  const Scalar eta_norm = eta.norm();
  if (eta_norm == 0.0) return TangentVector::zeros_like(x);
  const Scalar h = 1e-6 * x.norm() / eta_norm;

  const FactorPair xp = retract(x, eta, h);
  const FactorPair xm = retract(x, eta, -h);
  TangentVector diff = transport(xp, x, riemannian_gradient(xp, prob, kind));
  diff -= transport(xm, x, riemannian_gradient(xm, prob, kind));
  diff *= 1.0 / (2.0 * h);

  const TangentVector grad = riemannian_gradient(x, prob, kind);
  switch (kind) {
    case MetricKind::Scaled:
      diff += connection_correction(x, eta, grad);
      break;
    case MetricKind::RightInvariant:
      diff += right_invariant_connection_correction(x, eta, grad);
      break;
  }
  return project_horizontal(x, diff);
}

Scalar rmse_on(const FactorPair &x, const SampleSet &samples) {
  require(!samples.empty(), "rmse_on: empty sample set");
  require(x.n() == samples.n_rows() && x.m() == samples.n_cols(),
          "rmse_on: point shape does not match the samples");
  const std::vector<Scalar> pred = sampled_product(x.G(), x.H(), samples);
  const auto truth = samples.values();
  Scalar acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const Scalar d = pred[k] - truth[k];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<Scalar>(samples.size()));
}

}  // namespace lrmc
