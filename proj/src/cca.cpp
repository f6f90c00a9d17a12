#include "napi/cca.hpp"

#include <cmath>
#include <random>

namespace napi {

void PairedViews::check() const {
  if (x.rows() != y.rows()) throw contract_error("PairedViews: row counts differ");
  if (x.rows() < 1) throw contract_error("PairedViews: empty views");
  if (gamma1 < 0.0 || gamma2 < 0.0) throw config_error("PairedViews: negative ridge");
}

SymOperator view_covariance(const Matrix& data, double gamma) {
  const Index n = data.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::int64_t nnz = (data.array() != 0.0).count();
  return SymOperator(
      data.cols(),
      [data, gamma, inv_n](const Vector& v) -> Vector {
        return inv_n * (data.transpose() * (data * v)) + gamma * v;
      },
      nnz);
}

GeneralizedPair block_operators(const PairedViews& views) {
  views.check();
  const Index d1 = views.d1(), d2 = views.d2();
  const double inv_n = 1.0 / static_cast<double>(views.n());
  const Matrix x = views.x, y = views.y;
  const double g1 = views.gamma1, g2 = views.gamma2;
  std::int64_t nnz = (x.array() != 0.0).count() + (y.array() != 0.0).count();

  SymOperator a(
      d1 + d2,
      [x, y, d1, d2, inv_n](const Vector& v) -> Vector {
        Vector out(d1 + d2);
        out.head(d1) = inv_n * (x.transpose() * (y * v.tail(d2)));  // S12 v2
        out.tail(d2) = inv_n * (y.transpose() * (x * v.head(d1)));  // S12^T v1
        return out;
      },
      nnz);
  SymOperator b(
      d1 + d2,
      [x, y, d1, d2, inv_n, g1, g2](const Vector& v) -> Vector {
        Vector out(d1 + d2);
        out.head(d1) = inv_n * (x.transpose() * (x * v.head(d1))) + g1 * v.head(d1);
        out.tail(d2) = inv_n * (y.transpose() * (y * v.tail(d2))) + g2 * v.tail(d2);
        return out;
      },
      nnz);
  return GeneralizedPair{std::move(a), std::move(b)};
}

GeneralizedPair block_operators_dense(const PairedViews& views) {
  views.check();
  const Index d1 = views.d1(), d2 = views.d2();
  const double inv_n = 1.0 / static_cast<double>(views.n());
  Matrix s11 = inv_n * views.x.transpose() * views.x +
               views.gamma1 * Matrix::Identity(d1, d1);
  Matrix s22 = inv_n * views.y.transpose() * views.y +
               views.gamma2 * Matrix::Identity(d2, d2);
  Matrix s12 = inv_n * views.x.transpose() * views.y;
  Matrix a = Matrix::Zero(d1 + d2, d1 + d2);
  a.topRightCorner(d1, d2) = s12;
  a.bottomLeftCorner(d2, d1) = s12.transpose();
  Matrix b = Matrix::Zero(d1 + d2, d1 + d2);
  b.topLeftCorner(d1, d1) = s11;
  b.bottomRightCorner(d2, d2) = s22;
  return GeneralizedPair{SymOperator::from_dense(std::move(a)),
                         SymOperator::from_dense(std::move(b))};
}

FiniteSum block_finite_sum(const PairedViews& views) {
  views.check();
  const Index n = views.n(), d1 = views.d1(), d2 = views.d2();
  const double s = std::sqrt(2.0);
  Matrix factors = Matrix::Zero(2 * n, d1 + d2);
  factors.topLeftCorner(n, d1) = s * views.x;
  factors.bottomRightCorner(n, d2) = s * views.y;
  Vector ridge(d1 + d2);
  ridge.head(d1).setConstant(views.gamma1);
  ridge.tail(d2).setConstant(views.gamma2);
  return FiniteSum{std::move(factors), 0.0, std::move(ridge)};
}

namespace {

CcaModel build_model(const Matrix& w, const Matrix& g, const PairedViews& views,
                     const SymOperator& s11, const SymOperator& s22) {
  const Index d1 = views.d1(), d2 = views.d2();
  Matrix phi = w.topRows(d1) * g;
  Matrix psi = w.bottomRows(d2) * g;
  phi = b_gram_schmidt(phi, s11).first.cols;
  psi = b_gram_schmidt(psi, s22).first.cols;
  // rotate into canonical alignment: SVD of Phi^T S12 Psi makes the
  // cross-correlation diagonal and nonnegative
  Matrix m = (views.x * phi).transpose() * (views.y * psi) /
             static_cast<double>(views.n());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  phi = phi * svd.matrixU();
  psi = psi * svd.matrixV();
  return CcaModel{std::move(phi), std::move(psi), svd.singularValues()};
}

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = gauss(rng);
  return g;
}

}  // namespace

CcaFitResult cca_fit(const PairedViews& views, Index k, const NapiConfig& cfg) {
  views.check();
  if (k < 1 || k > std::min(views.d1(), views.d2()))
    throw contract_error("cca_fit: k out of range");

  const bool need_dense = cfg.solver.kind == SolverKind::Exact;
  GeneralizedPair pair = need_dense ? block_operators_dense(views) : block_operators(views);
  SymOperator s11 = view_covariance(views.x, views.gamma1);
  SymOperator s22 = view_covariance(views.y, views.gamma2);

  NapiConfig run = cfg;
  run.k = 2 * k;
  if (!run.b_finite_sum &&
      (cfg.solver.kind == SolverKind::Svrg || cfg.solver.kind == SolverKind::AcceleratedSvrg))
    run.b_finite_sum = block_finite_sum(views);

  Matrix g = gaussian(2 * k, k, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  run.observer = [&](Index t, const Matrix& w_cur, TraceRow& row) {
    try {
      CcaModel snap = build_model(w_cur, g, views, s11, s22);
      row.objective = cca_objective(snap, views);
    } catch (const std::exception&) {
      // early iterates can be rank-deficient under projection; leave NaN
    }
    if (cfg.observer) cfg.observer(t, w_cur, row);
  };

  Matrix x0 = gaussian(views.d1() + views.d2(), 2 * k, cfg.seed);
  auto [basis, trace] = napi_topk(pair, run, x0);

  CcaModel model;
  try {
    model = build_model(basis.cols, g, views, s11, s22);
  } catch (const degenerate_basis_error&) {
    // rank-deficient Gaussian projection has probability zero; reseed once
    g = gaussian(2 * k, k, (cfg.seed + 1) ^ 0x9e3779b97f4a7c15ULL);
    model = build_model(basis.cols, g, views, s11, s22);
  }
  return CcaFitResult{std::move(model), std::move(trace)};
}

double cca_objective(const CcaModel& model, const PairedViews& views) {
  views.check();
  return ((views.x * model.phi).array() * (views.y * model.psi).array()).sum() /
         static_cast<double>(views.n());
}

CcaModel cca_dense_oracle(const PairedViews& views, Index k) {
  views.check();
  if (k < 1 || k > std::min(views.d1(), views.d2()))
    throw contract_error("cca_dense_oracle: k out of range");
  const Index d1 = views.d1(), d2 = views.d2();
  const double inv_n = 1.0 / static_cast<double>(views.n());
  Matrix s11 = inv_n * views.x.transpose() * views.x + views.gamma1 * Matrix::Identity(d1, d1);
  Matrix s22 = inv_n * views.y.transpose() * views.y + views.gamma2 * Matrix::Identity(d2, d2);
  Matrix s12 = inv_n * views.x.transpose() * views.y;
  Eigen::LLT<Matrix> l1(s11), l2(s22);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success)
    throw definiteness_error("cca_dense_oracle: covariance not PD");
  Matrix t = l1.matrixL().solve(s12);
  t = l2.matrixL().solve(t.transpose().eval()).transpose();
  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix phi = l1.matrixU().solve(svd.matrixU().leftCols(k));
  Matrix psi = l2.matrixU().solve(svd.matrixV().leftCols(k));
  return CcaModel{std::move(phi), std::move(psi), svd.singularValues().head(k)};
}

}  // namespace napi
