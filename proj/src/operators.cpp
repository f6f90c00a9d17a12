#include "napi/operators.hpp"

namespace napi {

SymOperator SymOperator::from_dense(Matrix m) {
  if (m.rows() != m.cols()) throw contract_error("SymOperator::from_dense: matrix not square");
  SymOperator op;
  op.dim_ = m.rows();
  op.nnz_ = (m.array() != 0.0).count();
  op.dense_ = std::make_shared<const Matrix>(std::move(m));
  auto d = op.dense_;
  op.apply_ = [d](const Vector& x) -> Vector { return (*d) * x; };
  return op;
}

SymOperator SymOperator::identity(Index dim) {
  return from_dense(Matrix::Identity(dim, dim));
}

Vector SymOperator::apply(const Vector& x) const {
  if (x.size() != dim_) throw contract_error("SymOperator::apply: dimension mismatch");
  return apply_(x);
}

Matrix SymOperator::apply_mat(const Matrix& x) const {
  if (x.rows() != dim_) throw contract_error("SymOperator::apply_mat: dimension mismatch");
  Matrix y(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) y.col(j) = apply_(x.col(j));
  return y;
}

const Matrix& SymOperator::dense() const {
  if (!dense_) throw capacity_error("SymOperator: no explicit dense form available");
  return *dense_;
}

const Eigen::LLT<Matrix>& SymOperator::llt() const {
  if (!llt_) {
    auto f = std::make_shared<Eigen::LLT<Matrix>>(dense());
    if (f->info() != Eigen::Success)
      throw definiteness_error("SymOperator: Cholesky factorization failed, matrix not PD");
    llt_ = std::move(f);
  }
  return *llt_;
}

}  // namespace napi
