#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "napi/types.hpp"

namespace napi {

/// A symmetric linear operator y = M x given by its matrix-free application.
/// An explicit dense form is optional and only needed by oracle/direct paths.
class SymOperator {
public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  SymOperator() = default;
  SymOperator(Index dim, ApplyFn apply, std::int64_t nnz)
      : dim_(dim), apply_(std::move(apply)), nnz_(nnz) {}

  static SymOperator from_dense(Matrix m);
  static SymOperator identity(Index dim);

  Index dim() const { return dim_; }
  std::int64_t nnz() const { return nnz_; }

  Vector apply(const Vector& x) const;
  /// Column-wise application.
  Matrix apply_mat(const Matrix& x) const;

  bool has_dense() const { return static_cast<bool>(dense_); }
  const Matrix& dense() const;

  /// Cached Cholesky factorization of the dense form. Throws
  /// definiteness_error if the factorization fails.
  const Eigen::LLT<Matrix>& llt() const;

private:
  Index dim_ = 0;
  ApplyFn apply_;
  std::int64_t nnz_ = 0;
  std::shared_ptr<const Matrix> dense_;
  mutable std::shared_ptr<const Eigen::LLT<Matrix>> llt_;
};

/// The (A, B) pair of a generalized eigenproblem A w = lambda B w,
/// with B positive definite.
struct GeneralizedPair {
  SymOperator a;
  SymOperator b;

  Index dim() const { return a.dim(); }
  void check() const {
    if (a.dim() != b.dim()) throw contract_error("GeneralizedPair: operator dims differ");
  }
};

}  // namespace napi
