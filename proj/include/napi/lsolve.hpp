#pragma once

#include <cstdint>
#include <optional>

#include "napi/operators.hpp"

namespace napi {

enum class SolverKind { Exact, GradientDescent, Nesterov, Svrg, AcceleratedSvrg };

const char* to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// Finite-sum structure of the quadratic term:
/// B = (1/n) factors^T factors + ridge I, one row of `factors` per component.
struct FiniteSum {
  Matrix factors;  // n x d
  double ridge = 0.0;
  Vector ridge_diag;  // per-coordinate ridge; overrides `ridge` when nonempty
};

struct SolverOptions {
  SolverKind kind = SolverKind::Exact;
  double step_size = 0.0;           // 0 -> 1/lambda_max (GD/Nesterov), 1/max_i||x_i||^2 (SVRG)
  Index epoch_length = 0;           // 0 -> 2n component steps per SVRG epoch
  std::uint64_t seed = 0;           // mandatory for stochastic kinds
  double lambda_min = 0.0;          // 0 -> estimated once per problem
  double lambda_max = 0.0;
  std::int64_t max_component_steps = 1'000'000;
};

/// One least-squares subproblem min 1/2 tr(W^T B W) - tr(W^T rhs),
/// warm-started at x0. The unique solution is B^{-1} rhs.
struct LsProblem {
  const SymOperator* b = nullptr;
  Matrix rhs;
  Matrix x0;
  std::optional<FiniteSum> finite_sum;

  Index dim() const { return rhs.rows(); }
  Index width() const { return rhs.cols(); }
  void check() const;
  double objective(const Matrix& w) const;
  Matrix gradient(const Matrix& w) const;  // B w - rhs
};

/// Solver output with its residual-reduction certificate.
struct LsReport {
  Matrix solution;
  double passes = 0.0;          // equivalent full-data passes
  double achieved_ratio = 0.0;  // certified upper bound on r_des / r_init
  std::int64_t iterations = 0;
};

/// Extreme eigenvalues of B, exact via the dense form when available,
/// otherwise power-iteration estimates with a safety margin.
std::pair<double, double> spectral_bounds(const LsProblem& prob);

/// ||w - B^{-1} rhs||_{B,F}^2 when the oracle solution is given; otherwise the
/// conservative surrogate ||grad f(w)||_F^2 / lambda_min (lambda_min > 0
/// required, else config_error).
double residual(const Matrix& w, const LsProblem& prob,
                const Matrix* oracle_solution = nullptr, double lambda_min = 0.0);

/// Runs the requested solver until the residual-ratio certificate
/// r(W)/r(x0) <= tau holds. Throws nonconvergence_error (carrying the best
/// iterate) if the iteration cap fires first.
LsReport solve(const LsProblem& prob, double tau, const SolverOptions& opts);

/// (kappa, kappa_tilde); kappa_tilde only for finite-sum problems.
std::pair<double, std::optional<double>> condition_numbers(const LsProblem& prob);

}  // namespace napi
