#pragma once

// Quotient geometry of rank-r matrices X = G H^T, with (G, H) identified
// with (G M^{-1}, H M^T) for every invertible r x r M.

#include "lrmc/types.hpp"

#include <string_view>

namespace lrmc {

/// Defaults for the full-rank test and the horizontality test.
inline constexpr Scalar kRankTol = 1e-12;
inline constexpr Scalar kHorizontalTol = 1e-10;

/// A point (G, H) of the total space. Gram matrices and their Cholesky
/// factors are computed once at construction. Rank-deficient pairs can be
/// represented; every operation that needs a Gram solve refuses them.
class FactorPair {
 public:
  FactorPair() = default;
  /// Throws ArgumentError if the column counts differ or are zero.
  FactorPair(Matrix G, Matrix H);

  const Matrix &G() const { return G_; }
  const Matrix &H() const { return H_; }
  Index n() const { return G_.rows(); }
  Index m() const { return H_.rows(); }
  Index rank() const { return G_.cols(); }

  const Matrix &gram_g() const { return gram_g_; }
  const Matrix &gram_h() const { return gram_h_; }

  /// Both Grams have smallest eigenvalue > kRankTol * largest.
  bool full_rank() const { return full_rank_; }

  /// X * (G^T G)^{-1}. Throws SingularityError when not full rank.
  Matrix solve_right_gram_g(const Matrix &X) const;
  /// X * (H^T H)^{-1}. Throws SingularityError when not full rank.
  Matrix solve_right_gram_h(const Matrix &X) const;
  /// (G^T G)^{-1} * X.
  Matrix solve_left_gram_g(const Matrix &X) const;
  /// (H^T H)^{-1} * X.
  Matrix solve_left_gram_h(const Matrix &X) const;

  /// Least-squares G^+ X via a Householder QR of G, n x k input.
  Matrix pinv_g(const Matrix &X) const;
  /// Least-squares H^+ X, m x k input.
  Matrix pinv_h(const Matrix &X) const;

  /// Frobenius norm of the stacked factors.
  Scalar norm() const;

 private:
  void require_invertible(const char *what) const;

  Matrix G_, H_;
  Matrix gram_g_, gram_h_;
  Eigen::LLT<Matrix> llt_g_, llt_h_;
  Eigen::HouseholderQR<Matrix> qr_g_, qr_h_;
  bool full_rank_ = false;
};

/// A pair of factor-shaped directions (zeta_G, zeta_H).
struct TangentVector {
  Matrix zG;
  Matrix zH;

  static TangentVector zeros_like(const FactorPair &x) {
    return {Matrix::Zero(x.n(), x.rank()), Matrix::Zero(x.m(), x.rank())};
  }

  /// Frobenius norm of the stacked blocks (not a metric norm).
  Scalar norm() const { return std::sqrt(zG.squaredNorm() + zH.squaredNorm()); }
  bool is_zero() const { return zG.isZero(0.0) && zH.isZero(0.0); }

  TangentVector &operator+=(const TangentVector &o) {
    zG += o.zG;
    zH += o.zH;
    return *this;
  }
  TangentVector &operator-=(const TangentVector &o) {
    zG -= o.zG;
    zH -= o.zH;
    return *this;
  }
  TangentVector &operator*=(Scalar s) {
    zG *= s;
    zH *= s;
    return *this;
  }
  /// this += alpha * o
  TangentVector &axpy(Scalar alpha, const TangentVector &o) {
    zG += alpha * o.zG;
    zH += alpha * o.zH;
    return *this;
  }
};

inline TangentVector operator+(TangentVector a, const TangentVector &b) { return a += b; }
inline TangentVector operator-(TangentVector a, const TangentVector &b) { return a -= b; }
inline TangentVector operator*(Scalar s, TangentVector a) { return a *= s; }
inline TangentVector operator-(TangentVector a) { return a *= -1.0; }

enum class MetricKind { Scaled, RightInvariant };

std::string_view to_string(MetricKind kind);
/// Accepts "scaled" and "right-invariant" (or "ri"). Throws ArgumentError.
MetricKind metric_from_string(std::string_view name);

/// Scaled:          Tr(H^T H xi_G^T eta_G) + Tr(G^T G xi_H^T eta_H)
/// RightInvariant:  Tr((G^T G)^{-1} xi_G^T eta_G) + Tr((H^T H)^{-1} xi_H^T eta_H)
Scalar metric(const FactorPair &x, const TangentVector &xi,
              const TangentVector &eta, MetricKind kind);

/// sqrt(metric(x, v, v, kind)).
Scalar metric_norm(const FactorPair &x, const TangentVector &v, MetricKind kind);

/// Lambda = 0.5 [eta_H^T H (H^T H)^{-1} - (G^T G)^{-1} G^T eta_G], the r x r
/// matrix that removes the vertical part of eta.
Matrix compute_lambda(const FactorPair &x, const TangentVector &eta);

/// (eta_G + G Lambda, eta_H - H Lambda^T).
TangentVector project_horizontal(const FactorPair &x, const TangentVector &eta);

/// The vertical vector (-G Lambda, H Lambda^T).
TangentVector vertical_vector(const FactorPair &x, const Matrix &lambda);

/// (G + step zeta_G, H + step zeta_H). Throws DegeneratePointError if the
/// result loses full column rank.
FactorPair retract(const FactorPair &x, const TangentVector &eta, Scalar step);

/// Moves xi to the horizontal space at `to` by projection.
TangentVector transport(const FactorPair &from, const FactorPair &to,
                        const TangentVector &xi);

/// Christoffel-type term (A_G, A_H) of the Levi-Civita connection for the
/// Scaled metric on the total space:
///   A_G = xi_G Sym(eta_H^T H) W_H + eta_G Sym(xi_H^T H) W_H - G Sym(xi_H^T eta_H) W_H
///   A_H = xi_H Sym(eta_G^T G) W_G + eta_H Sym(xi_G^T G) W_G - H Sym(xi_G^T eta_G) W_G
/// with W_H = (H^T H)^{-1}, W_G = (G^T G)^{-1}. Symmetric and bilinear.
TangentVector connection_correction(const FactorPair &x,
                                    const TangentVector &eta,
                                    const TangentVector &xi);

/// The same term for the right-invariant metric, blockwise
///   A_G = -xi_G W_G Sym(G^T eta_G) - eta_G W_G Sym(G^T xi_G) + G W_G Sym(xi_G^T eta_G)
/// and likewise for H.
TangentVector right_invariant_connection_correction(const FactorPair &x,
                                                    const TangentVector &eta,
                                                    const TangentVector &xi);

/// ||G^T xi_G H^T H - G^T G xi_H^T H||_F normalized by
/// ||G|| ||xi_G|| ||H||^2 + ||G||^2 ||xi_H|| ||H|| (0 for the zero vector).
Scalar horizontal_defect(const FactorPair &x, const TangentVector &xi);

bool is_horizontal(const FactorPair &x, const TangentVector &xi,
                   Scalar tol = kHorizontalTol);

}  // namespace lrmc
