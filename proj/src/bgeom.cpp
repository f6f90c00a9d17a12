#include "napi/bgeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace napi {

namespace {

void check_b_orthonormal(const BBasis& x, const SymOperator& b, const char* who) {
  Matrix gram = x.cols.transpose() * b.apply_mat(x.cols);
  double err = (gram - Matrix::Identity(x.k(), x.k())).cwiseAbs().maxCoeff();
  if (err > 1e-8) throw contract_error(std::string(who) + ": input basis is not B-orthonormal");
}

}  // namespace

double SpectrumOracle::gap(Index k) const {
  if (k < 1 || k >= dim()) throw contract_error("SpectrumOracle::gap: k out of range");
  double a = std::abs(eigenvalues[k - 1]);
  if (a == 0.0) return 0.0;
  return 1.0 - std::abs(eigenvalues[k]) / a;
}

double b_inner(const Vector& x, const Vector& y, const SymOperator& b) {
  if (x.size() != b.dim() || y.size() != b.dim())
    throw contract_error("b_inner: dimension mismatch");
  return x.dot(b.apply(y));
}

double b_norm(const Vector& x, const SymOperator& b) {
  double q = b_inner(x, x, b);
  if (q < 0.0) {
    // tolerate round-off on the zero vector only
    if (q > -1e-12 * (1.0 + x.squaredNorm())) return 0.0;
    throw definiteness_error("b_norm: negative quadratic form, B is not positive definite");
  }
  return std::sqrt(q);
}

std::pair<BBasis, Matrix> b_gram_schmidt(const Matrix& w, const SymOperator& b) {
  const Index d = w.rows(), k = w.cols();
  if (d != b.dim()) throw contract_error("b_gram_schmidt: dimension mismatch");
  Matrix q(d, k);
  Matrix r = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    Vector v = w.col(j);
    const double scale = std::max(1.0, b_norm(v, b));
    // modified Gram-Schmidt with one reorthogonalization sweep
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (Index i = 0; i < j; ++i) {
        double c = b_inner(q.col(i), v, b);
        v -= c * q.col(i);
        r(i, j) += c;
      }
    }
    double nrm = b_norm(v, b);
    if (nrm <= 1e-12 * scale)
      throw degenerate_basis_error("b_gram_schmidt: rank-deficient input (column " +
                                   std::to_string(j) + ")");
    r(j, j) = nrm;
    q.col(j) = v / nrm;
  }
  return {BBasis{std::move(q)}, std::move(r)};
}

PrincipalAngle principal_angle(const BBasis& x, const BBasis& y, const SymOperator& b) {
  if (x.k() != y.k()) throw contract_error("principal_angle: bases have different widths");
  check_b_orthonormal(x, b, "principal_angle");
  check_b_orthonormal(y, b, "principal_angle");
  Matrix m = x.cols.transpose() * b.apply_mat(y.cols);
  Eigen::JacobiSVD<Matrix> svd(m);
  double c = svd.singularValues()(x.k() - 1);
  c = std::clamp(c, 0.0, 1.0);
  double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  double t = c < 1e-14 ? std::numeric_limits<double>::infinity() : s / c;
  return {c, s, t};
}

double subspace_distance(const BBasis& x, const BBasis& y, const SymOperator& b) {
  if (x.k() != y.k()) throw contract_error("subspace_distance: bases have different widths");
  check_b_orthonormal(x, b, "subspace_distance");
  check_b_orthonormal(y, b, "subspace_distance");
  const Index k = x.k();
  // The projector difference (X X^T - Y Y^T) B is similar to the symmetric
  // B^{1/2} (X X^T - Y Y^T) B^{1/2}, so its B-operator norm is its spectral
  // radius. Writing the difference as U V^T with U = [X, -Y], V = [B X, B Y],
  // the nonzero eigenvalues are those of the 2k x 2k compression V^T U.
  Matrix u(x.dim(), 2 * k), v(x.dim(), 2 * k);
  u << x.cols, -y.cols;
  v << b.apply_mat(x.cols), b.apply_mat(y.cols);
  Eigen::EigenSolver<Matrix> es(v.transpose() * u);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SpectrumOracle dense_oracle(const GeneralizedPair& pair, Index max_dim) {
  pair.check();
  const Index d = pair.dim();
  if (d > max_dim) throw capacity_error("dense_oracle: dimension exceeds cap");
  const Matrix& a = pair.a.dense();
  const Eigen::LLT<Matrix>& llt = pair.b.llt();
  Matrix l = llt.matrixL();
  // M = L^{-1} A L^{-T}, symmetric
  Matrix m = l.triangularView<Eigen::Lower>().solve(a);
  m = l.triangularView<Eigen::Lower>().solve(m.transpose().eval());
  m = 0.5 * (m + m.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw definiteness_error("dense_oracle: symmetric eigensolver failed");
  Vector lam = es.eigenvalues();
  // back-transform u_i = L^{-T} p_i; these satisfy U^T B U = I
  Matrix u = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());

  std::vector<Index> order(d);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    double ai = std::abs(lam[i]), aj = std::abs(lam[j]);
    if (ai != aj) return ai > aj;
    if (lam[i] != lam[j]) return lam[i] > lam[j];
    return i < j;
  });
  SpectrumOracle out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    out.eigenvalues[i] = lam[order[i]];
    out.eigenvectors.col(i) = u.col(order[i]);
  }
  return out;
}

std::pair<std::complex<double>, std::complex<double>> momentum_roots(double lambda, double beta) {
  double disc = lambda * lambda - 4.0 * beta;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    return {{(lambda + s) / 2.0, 0.0}, {(lambda - s) / 2.0, 0.0}};
  }
  double im = std::sqrt(-disc) / 2.0;
  return {{lambda / 2.0, im}, {lambda / 2.0, -im}};
}

std::vector<ExtendedEigenvalue> extended_eigenpairs(const SpectrumOracle& oracle, double beta) {
  if (beta < 0.0) throw contract_error("extended_eigenpairs: beta must be nonnegative");
  std::vector<ExtendedEigenvalue> out;
  out.reserve(2 * oracle.dim());
  for (Index i = 0; i < oracle.dim(); ++i) {
    auto [m1, m2] = momentum_roots(oracle.eigenvalues[i], beta);
    // complex pairs have magnitude exactly sqrt(beta)
    double mag = m1.imag() != 0.0 ? std::sqrt(beta) : 0.0;
    out.push_back({m1, m1.imag() != 0.0 ? mag : std::abs(m1.real())});
    out.push_back({m2, m2.imag() != 0.0 ? mag : std::abs(m2.real())});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ExtendedEigenvalue& a, const ExtendedEigenvalue& b) {
                     return a.magnitude > b.magnitude;
                   });
  return out;
}

}  // namespace napi
