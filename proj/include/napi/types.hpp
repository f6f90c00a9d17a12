#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace napi {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index  = Eigen::Index;

/// Caller violated an operation contract (dimension mismatch, bad range, ...).
class contract_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be positive definite turned out not to be.
class definiteness_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerically rank-deficient basis where full rank is required.
class degenerate_basis_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense/oracle path requested beyond its size cap.
class capacity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing or inconsistent configuration.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterate collapsed (normalization underflow, rank loss mid-run).
class degenerate_iterate_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver hit its cap before certifying the requested accuracy.
/// Carries the best iterate and the ratio it did certify.
class nonconvergence_error : public std::runtime_error {
public:
  nonconvergence_error(const std::string& msg, Matrix best, double achieved)
      : std::runtime_error(msg), best_iterate(std::move(best)), achieved_ratio(achieved) {}
  Matrix best_iterate;
  double achieved_ratio;
};

}  // namespace napi
