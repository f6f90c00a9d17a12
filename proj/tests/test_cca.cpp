#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "napi/synthetic.hpp"

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

SyntheticViewsSpec planted_spec(Index n, Index d1, Index d2, std::vector<double> rho,
                                std::uint64_t seed, double condition = 1.0) {
  SyntheticViewsSpec spec;
  spec.n = n;
  spec.d1 = d1;
  spec.d2 = d2;
  spec.correlations =
      Eigen::Map<const Vector>(rho.data(), static_cast<Index>(rho.size()));
  spec.condition = condition;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("implicit block operators agree with the dense construction") {
  PairedViews views = gen_views(planted_spec(40, 5, 4, {0.7, 0.3}, 1, 4.0));
  views.gamma1 = 0.01;
  views.gamma2 = 0.02;
  GeneralizedPair implicit = block_operators(views);
  GeneralizedPair dense = block_operators_dense(views);
  for (std::uint64_t s = 0; s < 4; ++s) {
    Vector v = random_matrix(9, 1, 10 + s).col(0);
    CHECK((implicit.a.apply(v) - dense.a.apply(v)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((implicit.b.apply(v) - dense.b.apply(v)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identical views give a unit top generalized eigenvalue") {
  PairedViews views;
  views.x = random_matrix(30, 3, 20);
  views.y = views.x;
  SpectrumOracle oracle = dense_oracle(block_operators_dense(views));
  // the spectrum is +/-1 with multiplicity; round-off decides which sign
  // sorts first, so compare magnitudes and the signed maximum
  CHECK(std::abs(oracle.eigenvalues[0]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(oracle.eigenvalues.maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("independent views have a vanishing cross operator") {
  PairedViews views = gen_views(planted_spec(40, 4, 3, {}, 21));
  GeneralizedPair pair = block_operators(views);
  for (std::uint64_t s = 0; s < 3; ++s) {
    Vector v = random_matrix(7, 1, 30 + s).col(0);
    CHECK(pair.a.apply(v).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("block spectrum comes in plus/minus pairs") {
  PairedViews views = gen_views(planted_spec(60, 5, 5, {0.8, 0.5, 0.2}, 22, 3.0));
  SpectrumOracle oracle = dense_oracle(block_operators_dense(views));
  Vector lam = oracle.eigenvalues;
  for (Index i = 0; i + 1 < lam.size(); i += 2)
    CHECK(lam[i] + lam[i + 1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("block finite sum materializes to the metric operator") {
  PairedViews views = gen_views(planted_spec(25, 4, 3, {0.6}, 23, 2.0));
  views.gamma1 = 1e-3;
  views.gamma2 = 1e-2;
  FiniteSum fsum = block_finite_sum(views);
  Matrix implied = fsum.factors.transpose() * fsum.factors /
                       static_cast<double>(fsum.factors.rows()) +
                   Matrix(fsum.ridge_diag.asDiagonal());
  Matrix dense = block_operators_dense(views).b.dense();
  CHECK((implied - dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the planted correlations are the sample canonical correlations") {
  PairedViews views = gen_views(planted_spec(200, 8, 6, {0.9, 0.5, 0.2}, 24, 10.0));
  CcaModel oracle = cca_dense_oracle(views, 3);
  CHECK(oracle.correlations[0] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(oracle.correlations[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(oracle.correlations[2] == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("single canonical pair is recovered to high accuracy") {
  PairedViews views = gen_views(planted_spec(120, 6, 5, {0.8}, 25, 2.0));
  NapiConfig cfg;
  cfg.beta = 0.0;
  cfg.max_outer = 60;
  cfg.seed = 26;
  CcaFitResult fit = cca_fit(views, 1, cfg);
  CcaModel truth = cca_dense_oracle(views, 1);
  SymOperator s11 = view_covariance(views.x, views.gamma1);
  double s = principal_angle(BBasis{fit.model.phi}, BBasis{truth.phi}, s11).sin_theta;
  CHECK(s <= 1e-6);
  CHECK(fit.model.correlations[0] == doctest::Approx(0.8).epsilon(1e-8));
}

TEST_CASE("identical single-column views report perfect correlation") {
  PairedViews views;
  views.x = random_matrix(50, 1, 27);
  views.y = views.x;
  NapiConfig cfg;
  cfg.max_outer = 10;
  cfg.seed = 28;
  CcaFitResult fit = cca_fit(views, 1, cfg);
  CHECK(fit.model.correlations[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fitted model satisfies the whitening constraints") {
  PairedViews views = gen_views(planted_spec(500, 20, 20, {0.9, 0.5, 0.2}, 29, 5.0));
  NapiConfig cfg;
  cfg.beta = 0.0;
  cfg.max_outer = 40;
  cfg.seed = 30;
  CcaFitResult fit = cca_fit(views, 3, cfg);
  GeneralizedPair dense = block_operators_dense(views);
  Matrix s11 = dense.b.dense().topLeftCorner(20, 20);
  Matrix s22 = dense.b.dense().bottomRightCorner(20, 20);
  Matrix c1 = fit.model.phi.transpose() * s11 * fit.model.phi;
  Matrix c2 = fit.model.psi.transpose() * s22 * fit.model.psi;
  CHECK((c1 - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((c2 - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("objective facts: oracle value, zero cross-covariance, column permutation") {
  PairedViews views = gen_views(planted_spec(150, 7, 6, {0.9, 0.4}, 31, 2.0));
  CcaModel oracle = cca_dense_oracle(views, 2);
  CHECK(cca_objective(oracle, views) ==
        doctest::Approx(oracle.correlations.sum()).epsilon(1e-10));

  PairedViews indep = gen_views(planted_spec(60, 4, 4, {}, 32));
  CcaModel m = cca_dense_oracle(indep, 2);
  CHECK(cca_objective(m, indep) == doctest::Approx(0.0).epsilon(1e-8));

  CcaModel swapped = oracle;
  swapped.phi.col(0).swap(swapped.phi.col(1));
  swapped.psi.col(0).swap(swapped.psi.col(1));
  CHECK(cca_objective(swapped, views) ==
        doctest::Approx(cca_objective(oracle, views)).epsilon(1e-12));
}

TEST_CASE("objective trace is nondecreasing after burn-in") {
  PairedViews views = gen_views(planted_spec(200, 10, 10, {0.9, 0.6}, 33, 3.0));
  NapiConfig cfg;
  cfg.beta = 0.0;
  cfg.max_outer = 30;
  cfg.seed = 34;
  CcaFitResult fit = cca_fit(views, 2, cfg);
  int checked = 0;
  for (std::size_t t = 5; t + 1 < fit.trace.rows.size(); ++t) {
    double a = fit.trace.rows[t].objective, b = fit.trace.rows[t + 1].objective;
    if (std::isnan(a) || std::isnan(b)) continue;
    CHECK(b >= a - 1e-6);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("random projection loses little of a converged subspace") {
  PairedViews views = gen_views(planted_spec(300, 12, 12, {0.9, 0.5, 0.2}, 35, 2.0));
  const Index k = 2;
  NapiConfig base;
  base.beta = 0.0;
  base.max_outer = 12;  // moderately converged so angles sit above round-off
  base.seed = 36;
  base.k = 2 * k;

  GeneralizedPair pair = block_operators_dense(views);
  SpectrumOracle oracle = dense_oracle(pair);
  Matrix x0 = random_matrix(24, 2 * k, 37);
  auto [w, trace] = napi_topk(pair, base, x0);
  double pre = principal_angle(w, BBasis{oracle.top(2 * k)}, pair.b).sin_theta;
  REQUIRE(pre > 1e-13);

  CcaModel truth = cca_dense_oracle(views, k);
  SymOperator s11 = view_covariance(views.x, views.gamma1);
  SymOperator s22 = view_covariance(views.y, views.gamma2);
  std::vector<double> post;
  std::mt19937_64 rng(38);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix g(2 * k, k);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < 2 * k; ++i) g(i, j) = gauss(rng);
    try {
      Matrix phi = b_gram_schmidt(w.cols.topRows(12) * g, s11).first.cols;
      Matrix psi = b_gram_schmidt(w.cols.bottomRows(12) * g, s22).first.cols;
      double a1 = principal_angle(BBasis{phi}, BBasis{truth.phi}, s11).sin_theta;
      double a2 = principal_angle(BBasis{psi}, BBasis{truth.psi}, s22).sin_theta;
      post.push_back(std::max(a1, a2));
    } catch (const degenerate_basis_error&) {
      // a projection this unlucky counts as a miss, not a crash
      post.push_back(1.0);
    }
  }
  std::sort(post.begin(), post.end());
  double median = post[post.size() / 2];
  CHECK(median <= 10.0 * k * k * pre);
}

TEST_CASE("input validation") {
  PairedViews bad;
  bad.x = random_matrix(10, 2, 39);
  bad.y = random_matrix(11, 2, 40);
  CHECK_THROWS_AS(block_operators(bad), contract_error);

  PairedViews views = gen_views(planted_spec(30, 3, 3, {0.5}, 41));
  NapiConfig cfg;
  CHECK_THROWS_AS(cca_fit(views, 5, cfg), contract_error);
  CHECK_THROWS_AS(cca_dense_oracle(views, 0), contract_error);
}
