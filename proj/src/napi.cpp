#include "napi/napi.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace napi {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double clamp_tau(double tau) { return std::clamp(tau, 1e-16, 1.0); }

// Larger-magnitude root of mu^2 - lambda mu + beta = 0 (real branch).
double dominant_root(double lambda, double beta) {
  double disc = lambda * lambda - 4.0 * beta;
  double s = std::sqrt(std::max(0.0, disc));
  return lambda >= 0.0 ? (lambda + s) / 2.0 : (lambda - s) / 2.0;
}

double sin_vs_oracle(const Matrix& w, const GeneralizedPair& pair, const SpectrumOracle& oracle,
                     Index k) {
  BBasis x{w};
  BBasis y{oracle.top(k)};
  return principal_angle(x, y, pair.b).sin_theta;
}

}  // namespace

void ErrorSchedule::check() const {
  if (!(delta_hat > 0.0 && delta_hat <= 1.0))
    throw config_error("ErrorSchedule: delta_hat must lie in (0, 1]");
  if (!(cos_theta0_hat > 0.0 && cos_theta0_hat <= 1.0))
    throw config_error("ErrorSchedule: cos_theta0_hat must lie in (0, 1]");
  if (!(gamma_ratio_hat >= 1.0))
    throw config_error("ErrorSchedule: gamma_ratio_hat must be >= 1");
}

double ErrorSchedule::tan_theta0_hat() const {
  double c = cos_theta0_hat;
  return std::sqrt(std::max(0.0, 1.0 - c * c)) / c;
}

Index ErrorSchedule::effective_phase_switch() const {
  if (phase_switch >= 0) return phase_switch;
  double t0 = tan_theta0_hat();
  if (t0 <= 1.0) return 0;
  double n = std::ceil(2.0 * std::sqrt(2.0) / std::sqrt(delta_hat) * std::log(t0));
  return static_cast<Index>(std::max(0.0, n));
}

double schedule_tau(const ErrorSchedule& sched, Index t, Index k) {
  sched.check();
  const bool phase1 = t < sched.effective_phase_switch();
  const double c = sched.cos_theta0_hat;
  if (k <= 1)
    return clamp_tau(phase1 ? sched.delta_hat * c * c / 32.0 : sched.delta_hat / 32.0);
  const double g2 = sched.gamma_ratio_hat * sched.gamma_ratio_hat;
  if (phase1) return clamp_tau(sched.delta_hat * c * c * c * c / (128.0 * k * g2));
  return clamp_tau(sched.delta_hat / (128.0 * g2));
}

void NapiConfig::check() const {
  if (beta < 0.0) throw config_error("NapiConfig: beta must be nonnegative");
  if (k < 1) throw config_error("NapiConfig: k must be >= 1");
  if (max_outer < 1) throw config_error("NapiConfig: max_outer must be >= 1");
  schedule.check();
  if (oracle_coupled && !oracle)
    throw config_error("NapiConfig: oracle_coupled mode needs an attached oracle");
}

double warm_start_scale(const Vector& w, const GeneralizedPair& pair) {
  pair.check();
  double denom = b_inner(w, w, pair.b);
  if (denom <= 0.0) throw contract_error("warm_start_scale: w must be nonzero");
  return w.dot(pair.a.apply(w)) / denom;
}

Matrix warm_start_block(const Matrix& w, const GeneralizedPair& pair) {
  pair.check();
  Matrix gram = w.transpose() * pair.b.apply_mat(w);
  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible())
    throw degenerate_basis_error("warm_start_block: W^T B W is singular");
  return lu.solve(w.transpose() * pair.a.apply_mat(w));
}

SymOperator extended_metric(const SymOperator& b) {
  const Index d = b.dim();
  if (b.has_dense()) {
    Matrix big = Matrix::Zero(2 * d, 2 * d);
    big.topLeftCorner(d, d) = b.dense();
    big.bottomRightCorner(d, d) = b.dense();
    return SymOperator::from_dense(std::move(big));
  }
  return SymOperator(
      2 * d,
      [b, d](const Vector& x) -> Vector {
        Vector y(2 * d);
        y.head(d) = b.apply(x.head(d));
        y.tail(d) = b.apply(x.tail(d));
        return y;
      },
      2 * b.nnz());
}

ExtendedDiagnostics extended_state(const IterateState& state, const GeneralizedPair& pair,
                                   const SpectrumOracle& oracle, double beta, Index k) {
  ExtendedDiagnostics out;
  const double lam_k = oracle.eigenvalues[k - 1];
  if (lam_k * lam_k < 4.0 * beta) return out;  // complex extended pairs, no real basis

  const Index d = pair.dim();
  out.vartheta.resize(2 * d, k);
  out.vartheta.topRows(d) = state.w_cur;
  out.vartheta.bottomRows(d) = state.w_prev;

  Matrix u = oracle.top(k);
  Vector mu(k);
  for (Index i = 0; i < k; ++i) mu[i] = dominant_root(oracle.eigenvalues[i], beta);
  Matrix v(2 * d, k);
  for (Index i = 0; i < k; ++i) {
    double scale = 1.0 / std::sqrt(1.0 + mu[i] * mu[i]);
    v.col(i).head(d) = mu[i] * scale * u.col(i);
    v.col(i).tail(d) = scale * u.col(i);
  }
  SymOperator metric = extended_metric(pair.b);
  BBasis y = b_gram_schmidt(out.vartheta, metric).first;
  PrincipalAngle ang = principal_angle(y, BBasis{std::move(v)}, metric);
  out.available = true;
  out.cos_theta = ang.cos_theta;
  out.sin_theta = ang.sin_theta;
  out.tan_theta = ang.tan_theta;
  return out;
}

BetaMethod beta_method_from_string(const std::string& name) {
  if (name == "oracle") return BetaMethod::Oracle;
  if (name == "estimate") return BetaMethod::Estimate;
  if (name == "user") return BetaMethod::User;
  throw config_error("unknown beta method: " + name);
}

double select_beta(const GeneralizedPair& pair, Index k, BetaMethod method, double user_beta,
                   std::string* warning, Index oracle_cap) {
  pair.check();
  if (k < 1 || k >= pair.dim()) throw contract_error("select_beta: k out of range");
  switch (method) {
    case BetaMethod::Oracle: {
      SpectrumOracle oracle = dense_oracle(pair, oracle_cap);
      double l = std::abs(oracle.eigenvalues[k]);
      return l * l / 4.0;
    }
    case BetaMethod::Estimate: {
      // Warm-up noisy power iterations on a (k+1)-wide block, then take the
      // (k+1)-th Rayleigh value. Heuristic, documented as such.
      NapiConfig warm;
      warm.beta = 0.0;
      warm.k = k + 1;
      warm.max_outer = 20;
      warm.solver.kind =
          pair.b.has_dense() ? SolverKind::Exact : SolverKind::Nesterov;
      std::mt19937_64 rng(0x4e415049ULL);
      std::normal_distribution<double> gauss;
      Matrix x0(pair.dim(), k + 1);
      for (Index j = 0; j < x0.cols(); ++j)
        for (Index i = 0; i < x0.rows(); ++i) x0(i, j) = gauss(rng);
      auto [basis, trace] = napi_topk(pair, warm, x0);
      Matrix z = basis.cols.transpose() * pair.a.apply_mat(basis.cols);
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (z + z.transpose()));
      Vector vals = es.eigenvalues();
      std::sort(vals.data(), vals.data() + vals.size(),
                [](double a, double b) { return std::abs(a) > std::abs(b); });
      double l = std::abs(vals[k]);
      return l * l / 4.0;
    }
    case BetaMethod::User: {
      if (user_beta < 0.0) throw config_error("select_beta: user beta must be nonnegative");
      if (pair.a.has_dense() && pair.b.has_dense() && pair.dim() <= oracle_cap) {
        try {
          SpectrumOracle oracle = dense_oracle(pair, oracle_cap);
          double two_sqrt_beta = 2.0 * std::sqrt(user_beta);
          double lk = std::abs(oracle.eigenvalues[k - 1]);
          double lk1 = std::abs(oracle.eigenvalues[k]);
          if (warning && !(lk1 <= two_sqrt_beta && two_sqrt_beta < lk))
            *warning = "user beta outside the bracket |lambda_{k+1}| <= 2 sqrt(beta) < "
                       "|lambda_k|; momentum may be suboptimal";
        } catch (const std::exception&) {
          // bracket not checkable, accept silently
        }
      }
      return user_beta;
    }
  }
  throw config_error("select_beta: unknown method");
}

namespace {

// Shared per-run solver setup: resolve spectral bounds once.
SolverOptions resolve_solver(const GeneralizedPair& pair, const NapiConfig& cfg) {
  SolverOptions opts = cfg.solver;
  if (opts.kind != SolverKind::Exact && (opts.lambda_min <= 0.0 || opts.lambda_max <= 0.0)) {
    LsProblem probe;
    probe.b = &pair.b;
    probe.rhs = Matrix::Zero(pair.dim(), 1);
    probe.x0 = probe.rhs;
    probe.finite_sum = cfg.b_finite_sum;
    auto [lo, hi] = spectral_bounds(probe);
    if (opts.lambda_min <= 0.0) opts.lambda_min = lo;
    if (opts.lambda_max <= 0.0) opts.lambda_max = hi;
  }
  return opts;
}

ErrorSchedule baseline_adjusted(const ErrorSchedule& sched, bool power_baseline) {
  if (!power_baseline) return sched;
  ErrorSchedule s = sched;
  s.delta_hat = sched.delta_hat * sched.delta_hat;  // power method needs Delta-scaled noise
  s.phase_switch = sched.phase_switch;
  return s;
}

}  // namespace

std::pair<Vector, ConvergenceTrace> napi_top1(const GeneralizedPair& pair, const NapiConfig& cfg,
                                              const Vector& x0) {
  pair.check();
  cfg.check();
  const Index d = pair.dim();
  if (x0.size() != d) throw contract_error("napi_top1: x0 dimension mismatch");
  double nrm0 = b_norm(x0, pair.b);
  if (nrm0 < 1e-300) throw contract_error("napi_top1: x0 must be nonzero");

  Vector w = x0 / nrm0;
  Vector w_prev = Vector::Zero(d);
  IterateState state{w, w_prev, 0.0, Matrix(), 0};
  SolverOptions opts = resolve_solver(pair, cfg);
  ErrorSchedule sched = baseline_adjusted(cfg.schedule, cfg.power_baseline_schedule);
  ConvergenceTrace trace;
  trace.rows.reserve(cfg.max_outer);
  double passes = 0.0;
  auto t_start = Clock::now();

  for (Index t = 0; t < cfg.max_outer; ++t) {
    TraceRow row;
    row.t = t;

    if (cfg.oracle) {
      state.w_cur = w;
      state.w_prev = w_prev;
      state.t = t;
      ExtendedDiagnostics ed = extended_state(state, pair, *cfg.oracle, cfg.beta, 1);
      if (ed.available) row.tan_extended = ed.tan_theta;
    }

    Vector aw = pair.a.apply(w);
    double alpha = w.dot(aw) / b_inner(w, w, pair.b);
    row.alpha = alpha;

    LsProblem prob;
    prob.b = &pair.b;
    prob.rhs = aw;
    prob.x0 = alpha * w;
    prob.finite_sum = cfg.b_finite_sum;

    double tau;
    if (cfg.oracle_coupled) {
      double s = sin_vs_oracle(w, pair, *cfg.oracle, 1);
      ExtendedDiagnostics ed = extended_state(state, pair, *cfg.oracle, cfg.beta, 1);
      double delta = cfg.oracle->gap(1);
      if (cfg.power_baseline_schedule) delta *= delta;
      if (ed.available && s > 1e-15) {
        double m = std::min(ed.sin_theta * ed.sin_theta, ed.cos_theta * ed.cos_theta);
        tau = clamp_tau(delta / 32.0 * m / (s * s));
      } else {
        tau = schedule_tau(sched, t, 1);
      }
    } else {
      tau = schedule_tau(sched, t, 1);
    }

    LsReport report = solve(prob, tau, opts);
    Vector wt1 = report.solution.col(0);
    row.ls_ratio = report.achieved_ratio;

    if (cfg.oracle && pair.b.has_dense()) {
      Vector wstar = pair.b.llt().solve(aw);
      Vector diff = prob.x0.col(0) - wstar;
      row.r_init = b_inner(diff, diff, pair.b);
      double l1 = std::abs(cfg.oracle->eigenvalues[0]);
      double s = sin_vs_oracle(w, pair, *cfg.oracle, 1);
      row.r_init_bound = l1 * l1 * s * s;
    }

    if (cfg.noise) wt1 += cfg.noise(t, w, w_prev).col(0);
    wt1 -= cfg.beta * w_prev;
    double gamma = b_norm(wt1, pair.b);
    if (gamma < 1e-14)
      throw degenerate_iterate_error("napi_top1: normalization underflow (beta too large "
                                     "or zero gap)");
    w_prev = w / gamma;
    w = wt1 / gamma;
    state.gamma = gamma;

    passes += report.passes + 1.0;
    row.passes = passes;
    if (cfg.oracle) row.sin_theta = sin_vs_oracle(w, pair, *cfg.oracle, 1);
    row.wall_ms = ms_since(t_start);
    if (cfg.observer) cfg.observer(t, w, row);
    trace.rows.push_back(row);
  }

  // sign convention: largest-magnitude entry positive
  Index imax;
  w.cwiseAbs().maxCoeff(&imax);
  if (w[imax] < 0.0) w = -w;
  return {std::move(w), std::move(trace)};
}

std::pair<BBasis, ConvergenceTrace> napi_topk(const GeneralizedPair& pair, const NapiConfig& cfg,
                                              const Matrix& x0) {
  pair.check();
  cfg.check();
  const Index d = pair.dim();
  const Index k = x0.cols();
  if (x0.rows() != d) throw contract_error("napi_topk: x0 dimension mismatch");
  if (k < 1) throw contract_error("napi_topk: x0 must have at least one column");

  Matrix w = b_gram_schmidt(x0, pair.b).first.cols;
  Matrix w_prev = Matrix::Zero(d, k);
  IterateState state{w, w_prev, 0.0, Matrix(), 0};
  SolverOptions opts = resolve_solver(pair, cfg);
  ErrorSchedule sched = baseline_adjusted(cfg.schedule, cfg.power_baseline_schedule);
  ConvergenceTrace trace;
  trace.rows.reserve(cfg.max_outer);
  double passes = 0.0;
  auto t_start = Clock::now();

  for (Index t = 0; t < cfg.max_outer; ++t) {
    TraceRow row;
    row.t = t;

    if (cfg.oracle) {
      state.w_cur = w;
      state.w_prev = w_prev;
      state.t = t;
      ExtendedDiagnostics ed = extended_state(state, pair, *cfg.oracle, cfg.beta, k);
      if (ed.available) row.tan_extended = ed.tan_theta;
    }

    Matrix aw = pair.a.apply_mat(w);
    Matrix gram = w.transpose() * pair.b.apply_mat(w);
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible())
      throw degenerate_basis_error("napi_topk: W^T B W is singular");
    Matrix z = lu.solve(w.transpose() * aw);
    row.alpha = z.trace() / static_cast<double>(k);

    LsProblem prob;
    prob.b = &pair.b;
    prob.rhs = aw;
    prob.x0 = w * z;
    prob.finite_sum = cfg.b_finite_sum;

    double tau;
    if (cfg.oracle_coupled) {
      PrincipalAngle cur = principal_angle(BBasis{w}, BBasis{cfg.oracle->top(k)}, pair.b);
      ExtendedDiagnostics ed = extended_state(state, pair, *cfg.oracle, cfg.beta, k);
      double delta = cfg.oracle->gap(k);
      if (cfg.power_baseline_schedule) delta *= delta;
      double gamma_r = std::abs(cfg.oracle->eigenvalues[0]) /
                       std::abs(cfg.oracle->eigenvalues[k - 1]);
      if (ed.available && cur.tan_theta > 1e-15 && std::isfinite(cur.tan_theta)) {
        double m = std::min(ed.sin_theta * ed.sin_theta, ed.cos_theta * ed.cos_theta);
        tau = clamp_tau(delta / (128.0 * k * gamma_r * gamma_r) * m /
                        (cur.tan_theta * cur.tan_theta));
      } else {
        tau = schedule_tau(sched, t, k);
      }
    } else {
      tau = schedule_tau(sched, t, k);
    }

    LsReport report = solve(prob, tau, opts);
    Matrix wt1 = report.solution;
    row.ls_ratio = report.achieved_ratio;

    if (cfg.oracle && pair.b.has_dense()) {
      Matrix wstar = pair.b.llt().solve(aw);
      Matrix diff = prob.x0 - wstar;
      row.r_init = (diff.array() * pair.b.apply_mat(diff).array()).sum();
    }

    if (cfg.noise) wt1 += cfg.noise(t, w, w_prev);
    wt1 -= cfg.beta * w_prev;

    auto [q, r] = b_gram_schmidt(wt1, pair.b);  // throws on rank collapse
    w_prev = r.transpose()
                 .triangularView<Eigen::Lower>()
                 .solve(w.transpose())
                 .transpose();  // W_t R^{-1}
    w = q.cols;
    state.r_mat = r;

    passes += report.passes + 1.0;
    row.passes = passes;
    if (cfg.oracle) row.sin_theta = sin_vs_oracle(w, pair, *cfg.oracle, k);
    row.wall_ms = ms_since(t_start);
    if (cfg.observer) cfg.observer(t, w, row);
    trace.rows.push_back(row);
  }

  return {BBasis{std::move(w)}, std::move(trace)};
}

}  // namespace napi
