#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace lrmc;
using namespace lrmc::testing;

namespace {

Matrix random_m(Index r, std::mt19937_64 &rng) {
  return gaussian(r, r, rng) + 3.0 * Matrix::Identity(r, r);
}

Scalar cost_along(const FactorPair &x, const TangentVector &eta, Scalar t, const Problem &p) {
  return cost(retract(x, eta, t), p);
}

}  // namespace

TEST(Problem, Validation) {
  const SampleSet a(3, 3, {0, 1}, {0, 1}, {1, 2});
  EXPECT_THROW(Problem(a, 0), ArgumentError);
  EXPECT_THROW(Problem(a, 4), ArgumentError);
  EXPECT_THROW(Problem(a, 1, SampleSet(3, 4, {0}, {2}, {1})), ArgumentError);
  EXPECT_THROW(Problem(a, 1, SampleSet(3, 3, {1}, {1}, {5})), ArgumentError);
  EXPECT_NO_THROW(Problem(a, 1, SampleSet(3, 3, {2}, {2}, {5})));
}

TEST(Cost, ScalarCaseAndExactFit) {
  EXPECT_DOUBLE_EQ(cost(scalar_point(1, 1), scalar_problem(4)), 9.0);
  EXPECT_EQ(cost(scalar_point(2, 2), scalar_problem(4)), 0.0);
  const Fixture f = make_fixture(20, 15, 2, 3.0, 1);
  EXPECT_LE(cost(f.gp.truth, f.gp.problem), 1e-28);
}

TEST(Cost, MatchesDenseOracle) {
  const Fixture f = make_fixture(25, 20, 3, 2.5, 2);
  const SampleSet &s = f.gp.problem.omega();
  const Matrix diff =
      (f.x.G() * f.x.H().transpose() - densify(s, s.values())).cwiseProduct(mask(s));
  const Scalar oracle = diff.squaredNorm() / static_cast<Scalar>(s.size());
  EXPECT_NEAR(cost(f.x, f.gp.problem), oracle, 1e-12 * oracle);
}

TEST(EuclideanGradient, ScalarAndExact) {
  const TangentVector g = euclidean_gradient(scalar_point(1, 1), scalar_problem(4));
  EXPECT_DOUBLE_EQ(g.zG(0, 0), -6.0);
  EXPECT_DOUBLE_EQ(g.zH(0, 0), -6.0);
  const Fixture f = make_fixture(15, 15, 2, 3.0, 3);
  EXPECT_LE(euclidean_gradient(f.gp.truth, f.gp.problem).norm(), 1e-13);
}

TEST(EuclideanGradient, MatchesFiniteDifferences) {
  const Fixture f = make_fixture(18, 14, 3, 3.0, 4);
  std::mt19937_64 rng(4);
  const TangentVector g = euclidean_gradient(f.x, f.gp.problem);
  for (int t = 0; t < 10; ++t) {
    const TangentVector xi = gaussian_vector(f.x, rng);
    const Scalar h = 1e-5;
    const Scalar fd =
        (cost_along(f.x, xi, h, f.gp.problem) - cost_along(f.x, xi, -h, f.gp.problem)) / (2 * h);
    EXPECT_NEAR(directional_derivative(g, xi), fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(RiemannianGradient, ScalarCase) {
  const TangentVector g = riemannian_gradient(scalar_point(1, 1), scalar_problem(4), MetricKind::Scaled);
  EXPECT_NEAR(g.zG(0, 0), -6.0, 1e-15);
  EXPECT_NEAR(g.zH(0, 0), -6.0, 1e-15);
  const Fixture f = make_fixture(15, 15, 2, 3.0, 5);
  for (MetricKind kind : {MetricKind::Scaled, MetricKind::RightInvariant})
    EXPECT_LE(riemannian_gradient(f.gp.truth, f.gp.problem, kind).norm(), 1e-12);
}

TEST(RiemannianGradient, ClosedForms) {
  const Fixture f = make_fixture(16, 13, 3, 3.0, 6);
  const FactorPair &x = f.x;
  const TangentVector e = euclidean_gradient(x, f.gp.problem);
  const Matrix WG = (x.G().transpose() * x.G()).inverse();
  const Matrix WH = (x.H().transpose() * x.H()).inverse();
  const TangentVector scaled{e.zG * WH, e.zH * WG};
  EXPECT_LE(rel(total_space_gradient(x, f.gp.problem, MetricKind::Scaled), scaled), 1e-12);
  const TangentVector ri{e.zG * x.G().transpose() * x.G(), e.zH * x.H().transpose() * x.H()};
  EXPECT_LE(rel(total_space_gradient(x, f.gp.problem, MetricKind::RightInvariant), ri), 1e-12);
}

TEST(RiemannianGradient, ScaledIsHorizontalBeforeProjection) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(20, 17, 4, 2.5, 70 + t);
    const TangentVector raw = total_space_gradient(f.x, f.gp.problem, MetricKind::Scaled);
    EXPECT_LE(horizontal_defect(f.x, raw), 1e-11);
  }
}

// Metric-compatibility: g(grad, xi) equals the directional derivative of the
// cost for every direction. The right-invariant identity holds for the
// unprojected total-space gradient, and for the projected one on directions
// that are horizontal in the right-invariant sense; here we use the former.
TEST(RiemannianGradient, MetricCompatibility) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(18, 15, 3, 3.0, 80 + t);
    const FactorPair &x = f.x;
    const TangentVector xi = gaussian_vector(x, rng);
    const Scalar h = 1e-5 * x.norm() / xi.norm();
    const Scalar fd =
        (cost_along(x, xi, h, f.gp.problem) - cost_along(x, xi, -h, f.gp.problem)) / (2 * h);
    const TangentVector gs = riemannian_gradient(x, f.gp.problem, MetricKind::Scaled);
    EXPECT_NEAR(metric(x, gs, xi, MetricKind::Scaled), fd, 1e-6 * (1 + std::abs(fd)));
    const TangentVector gr = total_space_gradient(x, f.gp.problem, MetricKind::RightInvariant);
    EXPECT_NEAR(metric(x, gr, xi, MetricKind::RightInvariant), fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(RiemannianGradient, FiberEquivariance) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(14, 12, 3, 3.0, 90 + t);
    const Matrix M = random_m(3, rng);
    const Matrix Minv = M.inverse();
    const FactorPair y(f.x.G() * Minv, f.x.H() * M.transpose());
    for (MetricKind kind : {MetricKind::Scaled, MetricKind::RightInvariant}) {
      const TangentVector gx = riemannian_gradient(f.x, f.gp.problem, kind);
      const TangentVector gy = riemannian_gradient(y, f.gp.problem, kind);
      EXPECT_LE(rel(gy, TangentVector{gx.zG * Minv, gx.zH * M.transpose()}), 1e-10);
    }
  }
}

TEST(Evaluate, ConsistentWithPieces) {
  const Fixture f = make_fixture(22, 19, 3, 3.0, 10);
  for (MetricKind kind : {MetricKind::Scaled, MetricKind::RightInvariant}) {
    const GradientEval ev = evaluate(f.x, f.gp.problem, kind);
    EXPECT_EQ(ev.cost, cost(f.x, f.gp.problem));
    EXPECT_LE(rel(ev.egrad, euclidean_gradient(f.x, f.gp.problem)), 1e-15);
    EXPECT_LE(rel(ev.rgrad, riemannian_gradient(f.x, f.gp.problem, kind)), 1e-15);
  }
}

TEST(Hessian, ZeroAndLinearity) {
  const Fixture f = make_fixture(16, 14, 2, 3.0, 11);
  std::mt19937_64 rng(11);
  EXPECT_LE(hessian_vec(f.x, f.gp.problem, TangentVector::zeros_like(f.x)).norm(), 0.0);
  const TangentVector a = project_horizontal(f.x, gaussian_vector(f.x, rng));
  const TangentVector b = project_horizontal(f.x, gaussian_vector(f.x, rng));
  const TangentVector lhs = hessian_vec(f.x, f.gp.problem, 1.5 * a - 0.5 * b);
  const TangentVector rhs =
      1.5 * hessian_vec(f.x, f.gp.problem, a) - 0.5 * hessian_vec(f.x, f.gp.problem, b);
  EXPECT_LE(rel(lhs, rhs), 1e-12);
  EXPECT_TRUE(is_horizontal(f.x, lhs));
}

TEST(Hessian, Symmetric) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(20, 16, 3, 3.0, 120 + t);
    const TangentVector a = project_horizontal(f.x, gaussian_vector(f.x, rng));
    const TangentVector b = project_horizontal(f.x, gaussian_vector(f.x, rng));
    const Scalar ab = metric(f.x, hessian_vec(f.x, f.gp.problem, a), b, MetricKind::Scaled);
    const Scalar ba = metric(f.x, a, hessian_vec(f.x, f.gp.problem, b), MetricKind::Scaled);
    EXPECT_LE(std::abs(ab - ba), 1e-10 * std::max(std::abs(ab), std::abs(ba)));
  }
}

TEST(Hessian, MatchesFiniteDifferenceFallback) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(20, 16, 3, 3.0, 130 + t);
    const TangentVector eta = project_horizontal(f.x, gaussian_vector(f.x, rng));
    const TangentVector exact = hessian_vec(f.x, f.gp.problem, eta);
    const TangentVector fd = fd_hessian_vec(f.x, f.gp.problem, eta, MetricKind::Scaled);
    EXPECT_LE(rel(exact, fd), 1e-5);
  }
}

// Along the straight-line retraction phi(t) = f(x + t eta) we have
// phi''(0) = g(Hess[eta], eta) + g(grad, A(eta, eta)) after projection; at a
// zero-residual optimum the second term vanishes.
TEST(Hessian, SecondDifferenceOfCost) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const Fixture f = make_fixture(20, 16, 3, 3.0, 140 + t);
    const Problem &p = f.gp.problem;
    for (const FactorPair *x : {&f.x, &f.gp.truth}) {
      const TangentVector eta = project_horizontal(*x, gaussian_vector(*x, rng));
      const TangentVector grad = riemannian_gradient(*x, p, MetricKind::Scaled);
      const Scalar model =
          metric(*x, hessian_vec(*x, p, eta), eta, MetricKind::Scaled) +
          metric(*x, grad, connection_correction(*x, eta, eta), MetricKind::Scaled);
      const auto second = [&](Scalar h) {
        return (cost_along(*x, eta, h, p) - 2 * cost(*x, p) + cost_along(*x, eta, -h, p)) / (h * h);
      };
      const Scalar d3 = second(1e-3), d4 = second(1e-4);
      const Scalar richardson = (100.0 * d4 - d3) / 99.0;
      EXPECT_LE(std::abs(model - richardson), 5e-5 * std::abs(model));
    }
  }
}

TEST(Hessian, RightInvariantFallbackHorizontalAndLinear) {
  std::mt19937_64 rng(15);
  const Fixture f = make_fixture(18, 15, 2, 3.0, 15);
  const TangentVector a = project_horizontal(f.x, gaussian_vector(f.x, rng));
  const TangentVector b = project_horizontal(f.x, gaussian_vector(f.x, rng));
  const MetricKind ri = MetricKind::RightInvariant;
  const TangentVector ha = fd_hessian_vec(f.x, f.gp.problem, a, ri);
  const TangentVector hb = fd_hessian_vec(f.x, f.gp.problem, b, ri);
  const TangentVector hab = fd_hessian_vec(f.x, f.gp.problem, 2.0 * a + b, ri);
  EXPECT_TRUE(is_horizontal(f.x, ha));
  EXPECT_LE(rel(hab, 2.0 * ha + hb), 1e-4);
}

TEST(Rmse, ScalarAndOracle) {
  EXPECT_DOUBLE_EQ(rmse_on(scalar_point(1, 1), SampleSet(1, 1, {0}, {0}, {4})), 3.0);
  const Fixture f = make_fixture(12, 10, 2, 3.0, 16);
  const SampleSet &s = f.gp.problem.omega();
  EXPECT_LE(rmse_on(f.gp.truth, s), 1e-14);
  Scalar acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Scalar d = f.x.G().row(s.rows()[k]).dot(f.x.H().row(s.cols()[k])) - s.values()[k];
    acc += d * d;
  }
  EXPECT_NEAR(rmse_on(f.x, s), std::sqrt(acc / s.size()), 1e-13);
}
