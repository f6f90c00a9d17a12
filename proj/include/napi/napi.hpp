#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "napi/bgeom.hpp"
#include "napi/lsolve.hpp"

namespace napi {

/// Residual-ratio targets for the inner least-squares solves, driven by user
/// estimates of the gap and the initial angle. phase_switch < 0 selects the
/// default iteration-indexed switch ceil((2*sqrt(2)/sqrt(delta)) * ln(tan theta0)).
struct ErrorSchedule {
  double delta_hat = 0.1;
  double cos_theta0_hat = 1.0;
  double gamma_ratio_hat = 1.0;  // |lambda_1|/|lambda_k| estimate, top-k only
  Index phase_switch = -1;

  void check() const;
  double tan_theta0_hat() const;
  Index effective_phase_switch() const;
};

/// Target ratio tau_t for iteration t at block width k.
double schedule_tau(const ErrorSchedule& sched, Index t, Index k);

struct TraceRow {
  Index t = 0;
  double passes = 0.0;
  double sin_theta = -1.0;  // vs oracle top-k, -1 when no oracle attached
  double alpha = 0.0;       // Rayleigh scale (k=1) or trace(Z)/k (k>1)
  double ls_ratio = 0.0;
  double wall_ms = 0.0;
  // oracle-coupled diagnostics, -1 when unavailable
  double r_init = -1.0;        // warm-start residual of this iteration
  double r_init_bound = -1.0;  // lambda_1^2 sin^2(w_t, u_1)
  double tan_extended = -1.0;  // tan angle of [w_t; w_{t-1}] vs extended top-k
  double objective = std::numeric_limits<double>::quiet_NaN();  // observer-filled
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
};

/// Current and previous iterates of Algorithms 1/2 plus the last
/// normalization (gamma for k=1, triangular R for k>1).
struct IterateState {
  Matrix w_cur;   // B-orthonormal
  Matrix w_prev;  // already rescaled by the last gamma / R^{-1}
  double gamma = 0.0;
  Matrix r_mat;
  Index t = 0;
};

struct NapiConfig {
  double beta = 0.0;
  Index k = 1;
  Index max_outer = 100;
  ErrorSchedule schedule;
  SolverOptions solver;
  std::uint64_t seed = 0;
  std::optional<FiniteSum> b_finite_sum;  // forwarded into every subproblem

  // Diagnostics / testing.
  const SpectrumOracle* oracle = nullptr;
  bool oracle_coupled = false;  // schedule + diagnostics from true angles
  bool power_baseline_schedule = false;  // phase-2 tau = delta^2/32
  // Test-only: additive error injected into the LS solution before the
  // momentum step, e_t = noise(t, w_cur, w_prev).
  std::function<Matrix(Index, const Matrix&, const Matrix&)> noise;
  // Called with the updated iterate at the end of every outer iteration,
  // before the trace row is recorded.
  std::function<void(Index, const Matrix&, TraceRow&)> observer;

  void check() const;
};

/// Rayleigh-quotient scale minimizing f(alpha w).
double warm_start_scale(const Vector& w, const GeneralizedPair& pair);

/// Z = (W^T B W)^{-1} W^T A W; W Z initializes the block subproblem.
Matrix warm_start_block(const Matrix& w, const GeneralizedPair& pair);

std::pair<Vector, ConvergenceTrace> napi_top1(const GeneralizedPair& pair, const NapiConfig& cfg,
                                              const Vector& x0);

std::pair<BBasis, ConvergenceTrace> napi_topk(const GeneralizedPair& pair, const NapiConfig& cfg,
                                              const Matrix& x0);

enum class BetaMethod { Oracle, Estimate, User };

BetaMethod beta_method_from_string(const std::string& name);

/// Momentum parameter: lambda_{k+1}^2/4 from the dense oracle, a warm-up
/// power-iteration estimate, or user pass-through (validated against the
/// bracket |lambda_{k+1}| <= 2 sqrt(beta) < |lambda_k| when checkable; a
/// violation yields a warning string, not an error).
double select_beta(const GeneralizedPair& pair, Index k, BetaMethod method,
                   double user_beta = 0.0, std::string* warning = nullptr,
                   Index oracle_cap = 2000);

/// blockdiag(B, B) metric of the extended system.
SymOperator extended_metric(const SymOperator& b);

struct ExtendedDiagnostics {
  bool available = false;  // false when 2 sqrt(beta) > |lambda_k| (complex mu)
  Matrix vartheta;         // 2d x k stack [w_t; w_{t-1}]
  double cos_theta = -1.0, sin_theta = -1.0, tan_theta = -1.0;
};

/// Angles of the stacked iterate against the extended top-k eigenbasis
/// V = [U Lambda; U](I + Lambda^2)^{-1/2}, measured in blockdiag(B, B).
ExtendedDiagnostics extended_state(const IterateState& state, const GeneralizedPair& pair,
                                   const SpectrumOracle& oracle, double beta, Index k);

}  // namespace napi
