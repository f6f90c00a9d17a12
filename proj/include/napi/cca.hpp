#pragma once

#include "napi/napi.hpp"

namespace napi {

/// Two data views with ridge regularizers; covariances are
/// S11 = X^T X / n + gamma1 I, S22 = Y^T Y / n + gamma2 I, S12 = X^T Y / n.
struct PairedViews {
  Matrix x;  // n x d1
  Matrix y;  // n x d2
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  Index n() const { return x.rows(); }
  Index d1() const { return x.cols(); }
  Index d2() const { return y.cols(); }
  void check() const;
};

/// Canonical directions with per-view whitening constraints
/// Phi^T S11 Phi = Psi^T S22 Psi = I and diag(Phi^T S12 Psi) = correlations.
struct CcaModel {
  Matrix phi;  // d1 x k
  Matrix psi;  // d2 x k
  Vector correlations;
};

/// Covariance operators of one view (matrix-free, O(nnz) per apply).
SymOperator view_covariance(const Matrix& data, double gamma);

/// The block pair A = [[0, S12], [S12^T, 0]], B = blockdiag(S11, S22) as
/// implicit operators; covariances are never materialized.
GeneralizedPair block_operators(const PairedViews& views);

/// Same pair with explicit dense forms (oracle/test paths only).
GeneralizedPair block_operators_dense(const PairedViews& views);

/// Finite-sum structure of the block B for stochastic inner solvers.
FiniteSum block_finite_sum(const PairedViews& views);

struct CcaFitResult {
  CcaModel model;
  ConvergenceTrace trace;
};

/// Algorithm: run the accelerated iteration on the top 2k of the block pair
/// (the spectrum is symmetric +/-), project 2k -> k with a seeded Gaussian,
/// then orthogonalize per view against S11 and S22. cfg.k is overridden.
CcaFitResult cca_fit(const PairedViews& views, Index k, const NapiConfig& cfg);

/// tr(Phi^T S12 Psi) for a constraint-feasible model.
double cca_objective(const CcaModel& model, const PairedViews& views);

/// Dense ground-truth CCA via whitened SVD (desk-scale only).
CcaModel cca_dense_oracle(const PairedViews& views, Index k);

}  // namespace napi
