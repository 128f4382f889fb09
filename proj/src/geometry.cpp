#include "lrmc/geometry.hpp"

#include <cmath>
#include <string>

namespace lrmc {

namespace {

bool gram_is_well_posed(const Matrix &gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const Scalar lo = eig.eigenvalues().minCoeff();
  const Scalar hi = eig.eigenvalues().maxCoeff();
  return std::isfinite(hi) && hi > 0.0 && lo > kRankTol * hi;
}

Matrix sym(const Matrix &Z) { return 0.5 * (Z + Z.transpose()); }

void check_shapes(const FactorPair &x, const TangentVector &v,
                  const char *what) {
  require(v.zG.rows() == x.n() && v.zG.cols() == x.rank() &&
              v.zH.rows() == x.m() && v.zH.cols() == x.rank(),
          std::string(what) + ": tangent vector shape does not match point");
}

}  // namespace

FactorPair::FactorPair(Matrix G, Matrix H) : G_(std::move(G)), H_(std::move(H)) {
  require(G_.cols() == H_.cols(), "FactorPair: G and H must have equal column counts");
  require(G_.cols() >= 1, "FactorPair: rank must be at least 1");
  gram_g_ = G_.transpose() * G_;
  gram_h_ = H_.transpose() * H_;
  full_rank_ = G_.allFinite() && H_.allFinite() && gram_is_well_posed(gram_g_) &&
               gram_is_well_posed(gram_h_);
  if (full_rank_) {
    llt_g_.compute(gram_g_);
    llt_h_.compute(gram_h_);
    full_rank_ = llt_g_.info() == Eigen::Success && llt_h_.info() == Eigen::Success;
  }
  if (full_rank_) {
    qr_g_.compute(G_);
    qr_h_.compute(H_);
  }
}

void FactorPair::require_invertible(const char *what) const {
  if (!full_rank_)
    throw SingularityError(std::string(what) + ": Gram matrix is rank deficient");
}

Matrix FactorPair::solve_right_gram_g(const Matrix &X) const {
  require_invertible("solve_right_gram_g");
  // X W = (W X^T)^T for symmetric W.
  return llt_g_.solve(X.transpose()).transpose();
}

Matrix FactorPair::solve_right_gram_h(const Matrix &X) const {
  require_invertible("solve_right_gram_h");
  return llt_h_.solve(X.transpose()).transpose();
}

Matrix FactorPair::solve_left_gram_g(const Matrix &X) const {
  require_invertible("solve_left_gram_g");
  return llt_g_.solve(X);
}

Matrix FactorPair::solve_left_gram_h(const Matrix &X) const {
  require_invertible("solve_left_gram_h");
  return llt_h_.solve(X);
}

Matrix FactorPair::pinv_g(const Matrix &X) const {
  require_invertible("pinv_g");
  return qr_g_.solve(X);
}

Matrix FactorPair::pinv_h(const Matrix &X) const {
  require_invertible("pinv_h");
  return qr_h_.solve(X);
}

Scalar FactorPair::norm() const {
  return std::sqrt(G_.squaredNorm() + H_.squaredNorm());
}

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Scaled:
      return "scaled";
    case MetricKind::RightInvariant:
      return "right-invariant";
  }
  return "unknown";
}

MetricKind metric_from_string(std::string_view name) {
  if (name == "scaled" || name == "new") return MetricKind::Scaled;
  if (name == "right-invariant" || name == "ri" || name == "right_invariant")
    return MetricKind::RightInvariant;
  throw ArgumentError("unknown metric '" + std::string(name) + "'");
}

Scalar metric(const FactorPair &x, const TangentVector &xi,
              const TangentVector &eta, MetricKind kind) {
  check_shapes(x, xi, "metric");
  check_shapes(x, eta, "metric");
  const Matrix cg = xi.zG.transpose() * eta.zG;
  const Matrix ch = xi.zH.transpose() * eta.zH;
  switch (kind) {
    case MetricKind::Scaled:
      // Tr(A B) for symmetric A is the Frobenius product <A, B^T>.
      return (x.gram_h().array() * cg.transpose().array()).sum() +
             (x.gram_g().array() * ch.transpose().array()).sum();
    case MetricKind::RightInvariant:
      return x.solve_left_gram_g(cg).trace() + x.solve_left_gram_h(ch).trace();
  }
  return 0.0;
}

Scalar metric_norm(const FactorPair &x, const TangentVector &v, MetricKind kind) {
  return std::sqrt(std::max(0.0, metric(x, v, v, kind)));
}

Matrix compute_lambda(const FactorPair &x, const TangentVector &eta) {
  check_shapes(x, eta, "compute_lambda");
  // eta_H^T H (H^T H)^{-1} = (H^+ eta_H)^T; QR keeps the error near eps * cond.
  const Matrix a = x.pinv_h(eta.zH).transpose();
  const Matrix b = x.pinv_g(eta.zG);
  return 0.5 * (a - b);
}

TangentVector project_horizontal(const FactorPair &x, const TangentVector &eta) {
  Matrix lambda = compute_lambda(x, eta);
  TangentVector p{eta.zG + x.G() * lambda, eta.zH - x.H() * lambda.transpose()};
  // One refinement pass.
  lambda = compute_lambda(x, p);
  p.zG += x.G() * lambda;
  p.zH -= x.H() * lambda.transpose();
  return p;
}

TangentVector vertical_vector(const FactorPair &x, const Matrix &lambda) {
  require(lambda.rows() == x.rank() && lambda.cols() == x.rank(),
          "vertical_vector: Lambda must be r x r");
  return {-x.G() * lambda, x.H() * lambda.transpose()};
}

FactorPair retract(const FactorPair &x, const TangentVector &eta, Scalar step) {
  check_shapes(x, eta, "retract");
  FactorPair out(x.G() + step * eta.zG, x.H() + step * eta.zH);
  if (!out.full_rank())
    throw DegeneratePointError("retract: result is not of full column rank");
  return out;
}

TangentVector transport(const FactorPair &from, const FactorPair &to,
                        const TangentVector &xi) {
  check_shapes(from, xi, "transport");
  require(from.n() == to.n() && from.m() == to.m() && from.rank() == to.rank(),
          "transport: points live on different manifolds");
  return project_horizontal(to, xi);
}

TangentVector connection_correction(const FactorPair &x,
                                    const TangentVector &eta,
                                    const TangentVector &xi) {
  check_shapes(x, eta, "connection_correction");
  check_shapes(x, xi, "connection_correction");
  const Matrix &G = x.G();
  const Matrix &H = x.H();
  const Matrix ag = xi.zG * sym(eta.zH.transpose() * H) +
                    eta.zG * sym(xi.zH.transpose() * H) -
                    G * sym(xi.zH.transpose() * eta.zH);
  const Matrix ah = xi.zH * sym(eta.zG.transpose() * G) +
                    eta.zH * sym(xi.zG.transpose() * G) -
                    H * sym(xi.zG.transpose() * eta.zG);
  return {x.solve_right_gram_h(ag), x.solve_right_gram_g(ah)};
}

TangentVector right_invariant_connection_correction(const FactorPair &x,
                                                    const TangentVector &eta,
                                                    const TangentVector &xi) {
  check_shapes(x, eta, "right_invariant_connection_correction");
  check_shapes(x, xi, "right_invariant_connection_correction");
  const auto block = [](const Matrix &F, const Matrix &e, const Matrix &z,
                        auto &&solve_left) -> Matrix {
    return -z * solve_left(sym(F.transpose() * e)) -
           e * solve_left(sym(F.transpose() * z)) +
           F * solve_left(sym(z.transpose() * e));
  };
  return {block(x.G(), eta.zG, xi.zG,
                [&](const Matrix &M) { return x.solve_left_gram_g(M); }),
          block(x.H(), eta.zH, xi.zH,
                [&](const Matrix &M) { return x.solve_left_gram_h(M); })};
}

Scalar horizontal_defect(const FactorPair &x, const TangentVector &xi) {
  check_shapes(x, xi, "horizontal_defect");
  const Matrix &G = x.G();
  const Matrix &H = x.H();
  const Matrix lhs = G.transpose() * xi.zG * x.gram_h();
  const Matrix rhs = x.gram_g() * xi.zH.transpose() * H;
  const Scalar g = G.norm();
  const Scalar h = H.norm();
  const Scalar scale = g * xi.zG.norm() * h * h + g * g * xi.zH.norm() * h;
  if (scale == 0.0) return 0.0;
  return (lhs - rhs).norm() / scale;
}

bool is_horizontal(const FactorPair &x, const TangentVector &xi, Scalar tol) {
  return horizontal_defect(x, xi) <= tol;
}

}  // namespace lrmc
