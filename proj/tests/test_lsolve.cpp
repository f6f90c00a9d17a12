#include <cmath>
#include <random>

#include <doctest.h>

#include "napi/bgeom.hpp"
#include "napi/lsolve.hpp"

using namespace napi;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  return m;
}

SymOperator random_spd(Index d, std::uint64_t seed) {
  Matrix g = random_matrix(d, d, seed);
  Matrix b = g * g.transpose() / static_cast<double>(d) + Matrix::Identity(d, d);
  return SymOperator::from_dense(std::move(b));
}

/// B = (1/n) X^T X + ridge I alongside its dense form, for stochastic kinds.
struct FiniteSumFixture {
  SymOperator b;
  FiniteSum fsum;
};

FiniteSumFixture make_finite_sum(Index n, Index d, double ridge, std::uint64_t seed) {
  Matrix x = random_matrix(n, d, seed);
  Matrix dense = x.transpose() * x / static_cast<double>(n) +
                 ridge * Matrix::Identity(d, d);
  return {SymOperator::from_dense(std::move(dense)), FiniteSum{std::move(x), ridge, Vector()}};
}

double true_ratio(const LsProblem& prob, const Matrix& w) {
  Matrix wstar = prob.b->llt().solve(prob.rhs);
  Matrix dn = w - wstar, d0 = prob.x0 - wstar;
  double num = (dn.array() * prob.b->apply_mat(dn).array()).sum();
  double den = (d0.array() * prob.b->apply_mat(d0).array()).sum();
  return num / den;
}

}  // namespace

TEST_CASE("residual at and near the solution") {
  SymOperator b = SymOperator::identity(3);
  LsProblem prob{&b, random_matrix(3, 1, 1), Matrix::Zero(3, 1), std::nullopt};
  Matrix wstar = prob.rhs;  // B = I
  CHECK(residual(wstar, prob, &wstar) == doctest::Approx(0.0));
  Matrix off = wstar;
  off(0, 0) += 1.0;
  CHECK(residual(off, prob, &wstar) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("residual equals twice the objective suboptimality") {
  SymOperator b = random_spd(10, 2);
  LsProblem prob{&b, random_matrix(10, 1, 3), Matrix::Zero(10, 1), std::nullopt};
  Matrix wstar = b.llt().solve(prob.rhs);
  Matrix w = random_matrix(10, 1, 4);
  double r = residual(w, prob, &wstar);
  CHECK(r == doctest::Approx(2.0 * (prob.objective(w) - prob.objective(wstar))).epsilon(1e-10));
}

TEST_CASE("residual surrogate needs a lambda_min estimate and stays conservative") {
  SymOperator b = random_spd(8, 5);
  LsProblem prob{&b, random_matrix(8, 1, 6), Matrix::Zero(8, 1), std::nullopt};
  Matrix w = random_matrix(8, 1, 7);
  CHECK_THROWS_AS(residual(w, prob), config_error);
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.dense(), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  Matrix wstar = b.llt().solve(prob.rhs);
  CHECK(residual(w, prob, nullptr, lmin) >= residual(w, prob, &wstar) - 1e-12);
}

TEST_CASE("exact solve reports ratio zero and solves the system") {
  SymOperator b = random_spd(12, 8);
  LsProblem prob{&b, random_matrix(12, 2, 9), Matrix::Zero(12, 2), std::nullopt};
  SolverOptions opts;
  LsReport rep = solve(prob, 0.5, opts);
  CHECK(rep.achieved_ratio == 0.0);
  CHECK((b.apply_mat(rep.solution) - prob.rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("already-optimal warm start returns immediately for every kind") {
  FiniteSumFixture fx = make_finite_sum(30, 6, 0.1, 10);
  Matrix rhs = random_matrix(6, 1, 11);
  Matrix wstar = fx.b.llt().solve(rhs);
  for (SolverKind kind : {SolverKind::Exact, SolverKind::GradientDescent, SolverKind::Nesterov,
                          SolverKind::Svrg, SolverKind::AcceleratedSvrg}) {
    LsProblem prob{&fx.b, rhs, wstar, fx.fsum};
    SolverOptions opts;
    opts.kind = kind;
    LsReport rep = solve(prob, 1e-6, opts);
    CHECK(rep.iterations == 0);
    CHECK((rep.solution - wstar).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gradient descent iteration count tracks the classical rate") {
  const double kappa = 100.0, tau = 1e-6;
  SymOperator b = SymOperator::from_dense((Matrix(2, 2) << 1, 0, 0, kappa).finished());
  Matrix rhs = Matrix::Zero(2, 1);
  Matrix x0(2, 1);
  x0 << 1.0, 0.01;  // equal gradient components, slow mode present
  LsProblem prob{&b, rhs, x0, std::nullopt};
  SolverOptions opts;
  opts.kind = SolverKind::GradientDescent;
  LsReport rep = solve(prob, tau, opts);
  double bound = std::ceil(kappa * std::log(1.0 / tau) / 2.0);
  CHECK(static_cast<double>(rep.iterations) <= 2.0 * bound);
  CHECK(static_cast<double>(rep.iterations) >= bound / 2.0);
  CHECK(rep.achieved_ratio <= tau);
}

TEST_CASE("solve validates tau") {
  SymOperator b = SymOperator::identity(2);
  LsProblem prob{&b, random_matrix(2, 1, 12), Matrix::Zero(2, 1), std::nullopt};
  SolverOptions opts;
  CHECK_THROWS_AS(solve(prob, 0.0, opts), config_error);
  CHECK_THROWS_AS(solve(prob, 1.5, opts), config_error);
}

TEST_CASE("stochastic kinds require finite-sum structure") {
  SymOperator b = random_spd(5, 13);
  LsProblem prob{&b, random_matrix(5, 1, 14), Matrix::Zero(5, 1), std::nullopt};
  SolverOptions opts;
  opts.kind = SolverKind::Svrg;
  CHECK_THROWS_AS(solve(prob, 0.1, opts), config_error);
}

TEST_CASE("iteration cap produces a nonconvergence error carrying the best iterate") {
  SymOperator b = random_spd(6, 15);
  LsProblem prob{&b, random_matrix(6, 1, 16), Matrix::Zero(6, 1), std::nullopt};
  SolverOptions opts;
  opts.kind = SolverKind::GradientDescent;
  opts.max_component_steps = 2;
  try {
    solve(prob, 1e-10, opts);
    FAIL("expected nonconvergence_error");
  } catch (const nonconvergence_error& e) {
    CHECK(e.best_iterate.rows() == 6);
    CHECK(e.achieved_ratio > 1e-10);
  }
}

TEST_CASE("certificate soundness: true ratio never exceeds the reported one") {
  FiniteSumFixture fx = make_finite_sum(40, 10, 0.2, 17);
  Matrix rhs = random_matrix(10, 1, 18);
  for (SolverKind kind : {SolverKind::GradientDescent, SolverKind::Nesterov, SolverKind::Svrg,
                          SolverKind::AcceleratedSvrg}) {
    LsProblem prob{&fx.b, rhs, random_matrix(10, 1, 19), fx.fsum};
    SolverOptions opts;
    opts.kind = kind;
    opts.seed = 99;
    LsReport rep = solve(prob, 1e-3, opts);
    CHECK(true_ratio(prob, rep.solution) <= rep.achieved_ratio + 1e-14);
    CHECK(rep.achieved_ratio <= 1e-3);
  }
}

TEST_CASE("stochastic solves are deterministic under a fixed seed") {
  FiniteSumFixture fx = make_finite_sum(25, 8, 0.1, 20);
  LsProblem prob{&fx.b, random_matrix(8, 2, 21), Matrix::Zero(8, 2), fx.fsum};
  SolverOptions opts;
  opts.kind = SolverKind::Svrg;
  opts.seed = 7;
  LsReport a = solve(prob, 1e-4, opts);
  LsReport b2 = solve(prob, 1e-4, opts);
  CHECK(a.passes == b2.passes);
  CHECK(a.iterations == b2.iterations);
  CHECK((a.solution - b2.solution).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cost in passes is nonincreasing as tau loosens") {
  FiniteSumFixture fx = make_finite_sum(30, 8, 0.15, 22);
  for (SolverKind kind : {SolverKind::GradientDescent, SolverKind::Nesterov, SolverKind::Svrg}) {
    double prev = -1.0;
    for (double tau : {1e-6, 1e-4, 1e-2}) {
      LsProblem prob{&fx.b, random_matrix(8, 1, 23), Matrix::Zero(8, 1), fx.fsum};
      SolverOptions opts;
      opts.kind = kind;
      opts.seed = 5;
      LsReport rep = solve(prob, tau, opts);
      if (prev >= 0.0) CHECK(rep.passes <= prev);
      prev = rep.passes;
    }
  }
}

TEST_CASE("Nesterov needs no more passes than gradient descent when ill-conditioned") {
  Matrix d = Matrix::Zero(20, 20);
  for (Index i = 0; i < 20; ++i) d(i, i) = 1.0 + (200.0 - 1.0) * i / 19.0;
  SymOperator b = SymOperator::from_dense(std::move(d));
  LsProblem prob{&b, random_matrix(20, 1, 24), Matrix::Zero(20, 1), std::nullopt};
  SolverOptions gd, nes;
  gd.kind = SolverKind::GradientDescent;
  nes.kind = SolverKind::Nesterov;
  LsReport rg = solve(prob, 1e-6, gd);
  LsReport rn = solve(prob, 1e-6, nes);
  CHECK(rn.passes <= rg.passes);
}

TEST_CASE("condition numbers") {
  SymOperator id = SymOperator::identity(4);
  LsProblem p1{&id, Matrix::Zero(4, 1), Matrix::Zero(4, 1), std::nullopt};
  CHECK(condition_numbers(p1).first == doctest::Approx(1.0).epsilon(1e-10));

  SymOperator b = SymOperator::from_dense((Matrix(2, 2) << 1, 0, 0, 10).finished());
  LsProblem p2{&b, Matrix::Zero(2, 1), Matrix::Zero(2, 1), std::nullopt};
  CHECK(condition_numbers(p2).first == doctest::Approx(10.0).epsilon(1e-10));

  // three unit-norm components with ridge: kappa_tilde = 1 / lambda_min(B)
  Matrix x = random_matrix(3, 3, 25);
  for (Index i = 0; i < 3; ++i) x.row(i).normalize();
  Matrix dense = x.transpose() * x / 3.0 + 0.1 * Matrix::Identity(3, 3);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense, Eigen::EigenvaluesOnly);
  SymOperator bf = SymOperator::from_dense(dense);
  LsProblem p3{&bf, Matrix::Zero(3, 1), Matrix::Zero(3, 1), FiniteSum{x, 0.1, Vector()}};
  auto [kappa, kt] = condition_numbers(p3);
  REQUIRE(kt.has_value());
  CHECK(*kt == doctest::Approx(1.0 / es.eigenvalues().minCoeff()).epsilon(1e-8));
}

TEST_CASE("solver kind names round-trip") {
  for (SolverKind kind : {SolverKind::Exact, SolverKind::GradientDescent, SolverKind::Nesterov,
                          SolverKind::Svrg, SolverKind::AcceleratedSvrg})
    CHECK(solver_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(solver_kind_from_string("lbfgs"), config_error);
}
