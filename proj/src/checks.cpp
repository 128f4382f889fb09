#include "lrmc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lrmc {

namespace {

struct Instance {
  Problem prob;
  FactorPair x;
};

Instance random_instance(std::mt19937_64 &rng) {
  std::uniform_int_distribution<Index> dim(8, 50);
  std::uniform_int_distribution<Index> rk(1, 8);
  GenSpec spec;
  spec.n = dim(rng);
  spec.m = dim(rng);
  spec.rank = rk(rng);
  const Scalar dof = static_cast<Scalar>((spec.n + spec.m - spec.rank) * spec.rank);
  spec.os_ratio = std::min(3.0, 0.9 * static_cast<Scalar>(spec.n * spec.m) / dof);
  spec.seed = rng();
  GeneratedProblem gp = generate_problem(spec);
  FactorPair x = init_random(spec.n, spec.m, spec.rank, rng());
  return {std::move(gp.problem), std::move(x)};
}

TangentVector random_vector(const FactorPair &x, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> normal;
  TangentVector v = TangentVector::zeros_like(x);
  for (Index j = 0; j < x.rank(); ++j) {
    for (Index i = 0; i < x.n(); ++i) v.zG(i, j) = normal(rng);
    for (Index i = 0; i < x.m(); ++i) v.zH(i, j) = normal(rng);
  }
  return v;
}

Matrix random_square(Index r, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> normal;
  Matrix M(r, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < r; ++i) M(i, j) = normal(rng);
  return M;
}

/// Random invertible M with condition number at most 1e3.
Matrix random_group_element(Index r, std::mt19937_64 &rng) {
  for (;;) {
    Matrix M = random_square(r, rng) + 2.0 * Matrix::Identity(r, r);
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector s = svd.singularValues();
    if (s(r - 1) > 0.0 && s(0) / s(r - 1) <= 1e3) return M;
  }
}

struct Worst {
  Scalar value = 0.0;
  void update(Scalar v) { value = std::isnan(v) ? v : std::max(value, v); }
};

}  // namespace

std::vector<CheckResult> run_invariant_checks(unsigned long long seed, int instances) {
  require(instances >= 1, "run_invariant_checks: instances must be >= 1");
  std::mt19937_64 rng(seed);
  Worst idem, kernel, ortho, fiber_scaled, fiber_ri, grad_fd, hess_sym, hess_fd;

  for (int t = 0; t < instances; ++t) {
    const Instance inst = random_instance(rng);
    const FactorPair &x = inst.x;
    const Problem &prob = inst.prob;
    const Index r = x.rank();

    const TangentVector eta = random_vector(x, rng);
    const TangentVector p = project_horizontal(x, eta);
    idem.update((project_horizontal(x, p) - p).norm() / eta.norm());

    const TangentVector v = vertical_vector(x, random_square(r, rng));
    kernel.update(project_horizontal(x, v).norm() / v.norm());
    ortho.update(std::abs(metric(x, p, v, MetricKind::Scaled)) /
                 (metric_norm(x, p, MetricKind::Scaled) * metric_norm(x, v, MetricKind::Scaled)));

    const Matrix M = random_group_element(r, rng);
    const Matrix Minv = M.inverse();
    const FactorPair y(x.G() * Minv, x.H() * M.transpose());
    const TangentVector xi = random_vector(x, rng);
    const auto act = [&](const TangentVector &z) -> TangentVector {
      return {z.zG * Minv, z.zH * M.transpose()};
    };
    for (MetricKind kind : {MetricKind::Scaled, MetricKind::RightInvariant}) {
      const Scalar a = metric(x, xi, eta, kind);
      const Scalar b = metric(y, act(xi), act(eta), kind);
      const Scalar scale = metric_norm(x, xi, kind) * metric_norm(x, eta, kind);
      (kind == MetricKind::Scaled ? fiber_scaled : fiber_ri).update(std::abs(a - b) / scale);
    }

    const GradientEval ev = evaluate(x, prob, MetricKind::Scaled);
    const Scalar h = 1e-5 * x.norm() / xi.norm();
    const Scalar fd = (cost(retract(x, xi, h), prob) - cost(retract(x, xi, -h), prob)) / (2 * h);
    const Scalar analytic = metric(x, ev.rgrad, xi, MetricKind::Scaled);
    grad_fd.update(std::abs(analytic - fd) / (1.0 + std::abs(fd)));

    const TangentVector e1 = project_horizontal(x, random_vector(x, rng));
    const TangentVector e2 = project_horizontal(x, random_vector(x, rng));
    const TangentVector he1 = hessian_vec(x, prob, e1);
    const TangentVector he2 = hessian_vec(x, prob, e2);
    const Scalar s12 = metric(x, he1, e2, MetricKind::Scaled);
    const Scalar s21 = metric(x, e1, he2, MetricKind::Scaled);
    hess_sym.update(std::abs(s12 - s21) / std::max({std::abs(s12), std::abs(s21), 1e-300}));

    const TangentVector fdh = fd_hessian_vec(x, prob, e1, MetricKind::Scaled);
    hess_fd.update((fdh - he1).norm() / he1.norm());
  }

  const auto line = [](std::string name, Scalar worst, Scalar tol) {
    return CheckResult{std::move(name), worst, tol, worst <= tol};
  };
  return {
      line("projection idempotence", idem.value, 1e-13),
      line("vertical kernel", kernel.value, 1e-13),
      line("scaled orthogonality to vertical space", ortho.value, 1e-12),
      line("scaled metric fiber invariance", fiber_scaled.value, 1e-11),
      line("right-invariant metric fiber invariance", fiber_ri.value, 1e-11),
      line("gradient vs central differences", grad_fd.value, 1e-6),
      line("hessian symmetry", hess_sym.value, 1e-10),
      line("hessian vs finite-difference fallback", hess_fd.value, 1e-5),
  };
}

}  // namespace lrmc
