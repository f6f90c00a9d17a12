#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "napi/operators.hpp"

namespace napi {

/// Columns forming a B-orthonormal basis: columns^T B columns = I.
struct BBasis {
  Matrix cols;

  Index dim() const { return cols.rows(); }
  Index k() const { return cols.cols(); }
};

/// Full dense generalized eigendecomposition, the ground truth for tests
/// and diagnostics. Eigenvalues are sorted by |lambda| descending, ties by
/// signed value descending then by index; U^T B U = I.
struct SpectrumOracle {
  Vector eigenvalues;  // sorted as above
  Matrix eigenvectors; // d x d, i-th column pairs with eigenvalues[i]

  Index dim() const { return eigenvalues.size(); }
  /// Relative gap 1 - |lambda_{k+1}| / |lambda_k| (1-based k).
  double gap(Index k) const;
  Matrix top(Index k) const { return eigenvectors.leftCols(k); }
};

/// The largest principal angle between two subspaces, reported redundantly.
struct PrincipalAngle {
  double cos_theta;
  double sin_theta;
  double tan_theta;  // +inf when cos below tolerance
};

/// One root pair of mu^2 - lambda mu + beta = 0 for an eigenvalue of the
/// extended (momentum) system.
struct ExtendedEigenvalue {
  std::complex<double> mu;
  double magnitude;
};

double b_inner(const Vector& x, const Vector& y, const SymOperator& b);
double b_norm(const Vector& x, const SymOperator& b);

/// B-metric QR: w = q.cols * r with q B-orthonormal and r upper triangular
/// with positive diagonal. Throws degenerate_basis_error on (numerical)
/// rank deficiency.
std::pair<BBasis, Matrix> b_gram_schmidt(const Matrix& w, const SymOperator& b);

/// Largest principal angle between two B-orthonormal bases of equal width.
PrincipalAngle principal_angle(const BBasis& x, const BBasis& y, const SymOperator& b);

/// Projector distance ||X X^T B - Y Y^T B||; equals sin of the largest
/// principal angle.
double subspace_distance(const BBasis& x, const BBasis& y, const SymOperator& b);

/// Full spectrum via the symmetric eigendecomposition of B^{-1/2} A B^{-1/2}
/// (through the Cholesky factor of B), back-transformed. Requires explicit
/// dense forms; dim must not exceed max_dim.
SpectrumOracle dense_oracle(const GeneralizedPair& pair, Index max_dim = 2000);

/// For each lambda_i the two roots of mu^2 - lambda_i mu + beta = 0,
/// sorted by magnitude descending. Complex pairs both have magnitude
/// sqrt(beta).
std::vector<ExtendedEigenvalue> extended_eigenpairs(const SpectrumOracle& oracle, double beta);

/// Roots of mu^2 - lambda mu + beta = 0 for a single lambda.
std::pair<std::complex<double>, std::complex<double>> momentum_roots(double lambda, double beta);

}  // namespace napi
