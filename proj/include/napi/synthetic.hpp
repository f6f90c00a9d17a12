#pragma once

#include <string>
#include <vector>

#include "napi/cca.hpp"

namespace napi {

/// Recipe for a generalized pair with a prescribed spectrum. Either an
/// explicit eigenvalue list or the (lambda1, delta, decay) triple with
/// |lambda_2| = |lambda_1|(1 - delta) and |lambda_{j+1}| = decay |lambda_j|
/// from there on. B gets condition number kappa_b.
struct SyntheticSpec {
  Index d = 0;
  Vector spectrum;  // explicit list; empty -> use the triple below
  double lambda1 = 1.0;
  double delta = 0.1;
  double decay = 0.9;
  double kappa_b = 1.0;
  std::uint64_t seed = 0;

  /// Resolved eigenvalues in oracle order; throws config_error when invalid.
  Vector eigenvalues() const;
};

struct SyntheticPair {
  GeneralizedPair pair;
  SpectrumOracle oracle;
};

/// B = Q D_B Q^T and A = B^{1/2} P diag(lambda) P^T B^{1/2} for random
/// orthogonal Q, P, so the generalized spectrum is exactly diag(lambda).
SyntheticPair gen_pair(const SyntheticSpec& spec);

/// Paired views whose sample canonical correlations (at gamma = 0) are
/// exactly the planted values. `condition` sets the per-view covariance
/// condition number via a geometric column scaling, which also drives the
/// finite-sum conditioning kappa_tilde upward. Requires n >= d1 + d2.
struct SyntheticViewsSpec {
  Index n = 0, d1 = 0, d2 = 0;
  Vector correlations;  // descending, in (0, 1]
  double condition = 1.0;
  double gamma1 = 0.0, gamma2 = 0.0;
  std::uint64_t seed = 0;
};

PairedViews gen_views(const SyntheticViewsSpec& spec);

/// The noisy power method: the same outer loop and least-squares machinery
/// with the momentum term disabled and the conservative gap-squared
/// residual-ratio targets.
std::pair<Vector, ConvergenceTrace> power_baseline(const GeneralizedPair& pair, NapiConfig cfg,
                                                   const Vector& x0);

struct RunConfig {
  SyntheticSpec problem;
  std::string algorithm = "napi";  // "napi" | "power"
  NapiConfig napi;
  Index repetitions = 1;
  std::string output_dir = ".";
  std::vector<double> thresholds{1e-2, 1e-4, 1e-6};
};

struct RunSummary {
  std::vector<double> median_passes;     // per threshold, -1 when the median run never got there
  std::vector<double> final_sin;         // per repetition, -1 on failed runs
  std::vector<std::string> run_errors;   // empty string for clean runs
};

/// Executes `repetitions` runs with seeds derived from the master seed,
/// writes trace_<rep>.csv files plus summary.json into output_dir. Solver
/// failures are recorded per run; the sweep continues. Outputs are
/// byte-identical across invocations with the same config.
RunSummary run_experiment(const RunConfig& cfg);

}  // namespace napi
